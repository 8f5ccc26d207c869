#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wgqed/series.hpp"

namespace wgqed {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_shortest(double x);

/// CSV with a header row and the columns of ObservableSeries::columns().
void write_csv(std::ostream& os, const ObservableSeries& series);
std::string to_csv(const ObservableSeries& series);

/// Parsed CSV: header plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(std::istream& is);

/// Everything written to the JSON sidecar next to a CSV.
struct RunMetadata {
  nlohmann::json config;
  std::uint64_t gate_checksum = 0;
  double gate_unitarity_error = 0.0;
  double wall_seconds = 0.0;
  bool deterministic = false;
  /// Present when the run was checked against the sector oracle.
  nlohmann::json oracle;
};

nlohmann::json sidecar(const ObservableSeries& series, const RunMetadata& meta);

}  // namespace wgqed
