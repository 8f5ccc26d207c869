// Command-line front end: run presets or configs, sweep a parameter, or
// run the acceptance suite.
//
// Exit codes: 0 success, 2 validation failure (acceptance or oracle
// check), 1 any other error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wgqed/acceptance.hpp"
#include "wgqed/config.hpp"
#include "wgqed/runner.hpp"

namespace {

using namespace wgqed;

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kValidationFailed = 2;

struct Common {
  std::string out;
  std::optional<double> dt;
  bool oracle_check = false;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output directory (default: from config, else ./out)");
  cmd->add_option("--dt", c.dt, "Step size; snapped per run so that tau/dt is an integer")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--oracle-check", c.oracle_check, "Compare every run against the sector oracle");
  cmd->add_flag("--deterministic", c.deterministic, "Bitwise reproducible kernels");
}

void apply_common(RunConfig& config, const Common& c) {
  if (!c.out.empty()) config.out_dir = c.out;
  if (c.dt) override_dt(config, *c.dt);
  config.oracle_check = config.oracle_check || c.oracle_check;
  config.deterministic = config.deterministic || c.deterministic;
}

int execute_config(const RunConfig& config) {
  const auto results = execute_all(config);
  bool oracle_ok = true;
  for (const auto& r : results) {
    write_outputs(r, config.out_dir);
    double residual = 0.0;
    for (const auto& s : r.series.samples) residual = std::max(residual, s.cons_residual);
    std::printf("%-24s steps %-5zu max bond %-4zu max residual %.2e  %.2fs", r.spec.name.c_str(),
                r.spec.steps(), r.series.max_bond, residual, r.meta.wall_seconds);
    if (r.oracle) std::printf("  oracle: %s", r.oracle->summary().c_str());
    std::printf("\n");
    for (const auto& w : r.series.warnings) std::printf("  warning: %s\n", w.c_str());
    oracle_ok = oracle_ok && !r.oracle_failed();
  }
  std::printf("wrote %zu run(s) to %s\n", results.size(), config.out_dir.c_str());
  return oracle_ok ? kOk : kValidationFailed;
}

std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw ConfigError("bad sweep value '" + tok + "'");
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Waveguide QED with delayed feedback: time-bin MPS simulator"};
  app.require_subcommand(1);

  std::string presets;
  for (const auto& p : preset_names()) presets += (presets.empty() ? "" : ", ") + p;

  Common run_opts;
  std::string target;
  auto* run_cmd = app.add_subcommand("run", "Run a preset (" + presets + ") or a JSON config");
  run_cmd->add_option("target", target, "Preset name or path to a config file")->required();
  add_common(run_cmd, run_opts);

  auto* validate_cmd = app.add_subcommand("validate", "Run the acceptance suite");
  bool quiet = false;
  validate_cmd->add_flag("--quiet", quiet, "Do not print progress of individual runs");

  Common sweep_opts;
  std::string param;
  std::vector<std::string> raw_values;
  std::string base = "fig2a";
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat one run over a list of parameter values");
  sweep_cmd->add_option("--param", param, "tau, phi, dt or horizon")->required();
  sweep_cmd->add_option("--values", raw_values, "Values, space or comma separated")->required();
  sweep_cmd->add_option("--base", base, "Preset or config whose first run is swept")
      ->capture_default_str();
  add_common(sweep_cmd, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (*run_cmd) {
      RunConfig config = resolve_config(target);
      apply_common(config, run_opts);
      return execute_config(config);
    }
    if (*sweep_cmd) {
      const RunConfig source = resolve_config(base);
      RunConfig config = sweep(source.runs.front(), param, parse_values(raw_values));
      config.out_dir = source.out_dir;
      apply_common(config, sweep_opts);
      return execute_config(config);
    }
    if (*validate_cmd) {
      RunCache cache(quiet ? nullptr : &std::cout);
      const auto results = run_acceptance(cache, &std::cout);
      int failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::printf("%zu criteria, %d failed\n", results.size(), failed);
      return failed == 0 ? kOk : kValidationFailed;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
