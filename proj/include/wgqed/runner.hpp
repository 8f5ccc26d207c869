#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "wgqed/config.hpp"
#include "wgqed/engine.hpp"
#include "wgqed/oracle.hpp"
#include "wgqed/series_io.hpp"

namespace wgqed {

struct RunOptions {
  bool deterministic = false;
  bool oracle_check = false;
  /// Deviation allowed against the oracle; 0 picks 1e-6 for two qubits and
  /// 1e-5 for four.
  double oracle_tolerance = 0.0;
};

struct RunResult {
  RunSpec spec;
  ObservableSeries series;
  RunMetadata meta;
  std::optional<ComparisonReport> oracle;

  bool oracle_failed() const { return oracle && !oracle->pass(); }
};

EngineOptions engine_options(const RunSpec& spec, bool deterministic);

RunResult execute(const RunSpec& spec, const RunOptions& options = {});

/// Run every spec of the config, several at a time when threads allow.
std::vector<RunResult> execute_all(const RunConfig& config);

/// Writes <dir>/<name>.csv and <dir>/<name>.json.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

}  // namespace wgqed
