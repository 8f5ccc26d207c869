#include "wgqed/series_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace wgqed {

std::string format_shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc{}) throw std::runtime_error("cannot format value");
  return {buf, res.ptr};
}

void write_csv(std::ostream& os, const ObservableSeries& series) {
  const auto names = series.columns();
  std::vector<std::vector<double>> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back(series.column(n));

  for (Index c = 0; c < names.size(); ++c) os << (c ? "," : "") << names[c];
  os << '\n';
  for (Index r = 0; r < series.samples.size(); ++r) {
    for (Index c = 0; c < cols.size(); ++c) os << (c ? "," : "") << format_shortest(cols[c][r]);
    os << '\n';
  }
}

std::string to_csv(const ObservableSeries& series) {
  std::ostringstream os;
  write_csv(os, series);
  return os.str();
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no column " + name);
  const auto c = static_cast<Index>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw std::runtime_error("ragged CSV row");
    std::vector<double> row(cells.size());
    for (Index c = 0; c < cells.size(); ++c) {
      const auto& s = cells[c];
      const auto res = std::from_chars(s.data(), s.data() + s.size(), row[c]);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("bad number '" + s + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

nlohmann::json sidecar(const ObservableSeries& series, const RunMetadata& meta) {
  using nlohmann::json;
  double max_residual = 0.0;
  double max_high = 0.0;
  for (const auto& s : series.samples) {
    max_residual = std::max(max_residual, s.cons_residual);
    for (Index n = 3; n < s.probabilities.size(); ++n) max_high = std::max(max_high, s.P(n));
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(meta.gate_checksum));

  json j;
  j["schema_version"] = kSeriesSchemaVersion;
  j["columns"] = series.columns();
  j["config"] = meta.config;
  j["gate"] = {{"checksum", hex}, {"unitarity_error", meta.gate_unitarity_error}};
  j["truncation"] = {
      {"final_weight", series.samples.empty() ? 0.0 : series.samples.back().trunc_weight},
      {"max_step_weight", series.max_step_truncation},
      {"max_bond", series.max_bond},
      {"warnings", series.warnings},
  };
  j["conservation"] = {{"max_residual", max_residual}};
  j["normalization"] = {
      {"field_operator", "b = a / sqrt(dt) per time bin"},
      {"g1_R", "<a^dag a> / dt"},
      {"g2_R", "<a^dag a^dag a a> / dt^2; multiply by dt^2 for the raw per-bin value"},
      {"corr_LR", "<a_L^dag a_R> / dt"},
      {"corr_af", "<sigma_n^+ a_R> / sqrt(dt)"},
      {"dt", series.dt},
  };
  if (series.n_qubits > 2) {
    j["audit"] = {{"max_P3_P4", max_high}};
  }
  j["wall_seconds"] = meta.wall_seconds;
  j["deterministic"] = meta.deterministic;
  if (!meta.oracle.is_null()) j["oracle"] = meta.oracle;
  return j;
}

}  // namespace wgqed
