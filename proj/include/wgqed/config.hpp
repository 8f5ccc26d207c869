#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wgqed/model.hpp"
#include "wgqed/mps.hpp"

namespace wgqed {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One simulation to perform and write out.
struct RunSpec {
  std::string name;
  PhysicalParams params;
  /// Pattern over {e, g}, or "A", "B", "C".
  std::string initial = "ee";
  /// Requested horizon; the run covers the first whole number of steps reaching it.
  double horizon = 5.0;
  Index stride = 1;
  TruncationPolicy truncation;

  Index steps() const;
  double end_time() const { return static_cast<double>(steps()) * params.dt; }
  nlohmann::json to_json() const;
};

struct RunConfig {
  /// Preset this config was derived from, empty for explicit configs.
  std::string preset;
  std::vector<RunSpec> runs;
  std::string out_dir = "out";
  bool oracle_check = false;
  bool deterministic = false;
};

/// Largest step not exceeding `target` that divides tau exactly.
double snapped_dt(double tau, double target);

/// Replace the step of every run by snapped_dt(tau, dt).
void override_dt(RunConfig& config, double dt);

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

/// Parse a config document. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Either a preset name or a path to a JSON config.
RunConfig resolve_config(const std::string& preset_or_path);

/// One copy of `base` per value of `param` ("tau", "phi", "dt" or "horizon").
RunConfig sweep(const RunSpec& base, const std::string& param, const std::vector<double>& values);

}  // namespace wgqed
