#include "wgqed/runner.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "wgqed/engine.hpp"
#include "wgqed/init_states.hpp"

namespace wgqed {

EngineOptions engine_options(const RunSpec& spec, bool deterministic) {
  EngineOptions o;
  o.truncation = spec.truncation;
  o.execution.deterministic = deterministic;
  return o;
}

RunResult execute(const RunSpec& spec, const RunOptions& options) {
  RunResult r;
  r.spec = spec;
  const InitialState init = initial_state_from_name(spec.initial);
  const StepGate gate = build_step_gate(spec.params);
  const double horizon = spec.end_time();

  const auto start = std::chrono::steady_clock::now();
  r.series = run(spec.params, init, horizon, spec.stride, engine_options(spec, options.deterministic));
  r.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  r.meta.config = spec.to_json();
  r.meta.gate_checksum = gate.checksum();
  r.meta.gate_unitarity_error = gate.unitarity_error();
  r.meta.deterministic = options.deterministic;

  if (options.oracle_check) {
    OracleOptions oo;
    oo.execution.deterministic = options.deterministic;
    const auto dense = evolve_dense(spec.params, init, horizon, spec.stride, oo);
    const double tol =
        options.oracle_tolerance > 0.0 ? options.oracle_tolerance
                                       : (spec.params.n_qubits > 2 ? 1e-5 : 1e-6);
    r.oracle = compare(r.series, dense, {}, tol);
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& f : r.oracle->fields) fields[f.field] = f.max_abs;
    r.meta.oracle = {{"tolerance", tol},
                     {"pass", r.oracle->pass()},
                     {"summary", r.oracle->summary()},
                     {"max_abs", fields}};
  }
  return r;
}

std::vector<RunResult> execute_all(const RunConfig& config) {
  RunOptions options;
  options.deterministic = config.deterministic;
  options.oracle_check = config.oracle_check;
  std::vector<RunResult> results(config.runs.size());
  std::vector<std::string> errors(config.runs.size());
  const auto n = static_cast<long>(config.runs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      results[static_cast<Index>(i)] = execute(config.runs[static_cast<Index>(i)], options);
    } catch (const std::exception& e) {
      errors[static_cast<Index>(i)] = config.runs[static_cast<Index>(i)].name + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return results;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / (result.spec.name + ".csv");
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  write_csv(csv, result.series);
  if (!csv) throw std::runtime_error("write failed for " + csv_path.string());

  const auto json_path = dir / (result.spec.name + ".json");
  std::ofstream meta(json_path);
  if (!meta) throw std::runtime_error("cannot write " + json_path.string());
  meta << sidecar(result.series, result.meta).dump(2) << '\n';
}

}  // namespace wgqed
