#include "wgqed/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "wgqed/init_states.hpp"
#include "wgqed/series_io.hpp"

namespace wgqed {

using nlohmann::json;

Index RunSpec::steps() const {
  if (!(params.dt > 0.0) || !(horizon >= 0.0)) throw ConfigError("horizon and dt must be positive");
  return static_cast<Index>(std::ceil(horizon / params.dt - 1e-9));
}

json RunSpec::to_json() const {
  json j;
  j["name"] = name;
  j["n_qubits"] = params.n_qubits;
  j["gamma_L"] = params.gamma_left;
  j["gamma_R"] = params.gamma_right;
  j["phi"] = params.phi;
  j["tau"] = params.tau;
  j["dt"] = params.dt;
  j["n_max"] = params.n_max;
  if (params.omega0) j["omega0"] = *params.omega0;
  j["initial"] = initial;
  j["horizon"] = horizon;
  j["stride"] = stride;
  j["truncation"] = {{"max_bond", truncation.max_bond},
                     {"svd_cutoff", truncation.svd_cutoff},
                     {"forbid_truncation", truncation.forbid_truncation}};
  return j;
}

double snapped_dt(double tau, double target) {
  if (!(target > 0.0)) throw ConfigError("dt must be positive");
  if (tau == 0.0) return target;
  const double bins = std::ceil(tau / target - 1e-9);
  return tau / bins;
}

void override_dt(RunConfig& config, double dt) {
  for (auto& r : config.runs) r.params.dt = snapped_dt(r.params.tau, dt);
}

namespace {

constexpr double kPi = std::numbers::pi;

RunSpec two_qubit(std::string name, double tau, double phi) {
  RunSpec r;
  r.name = std::move(name);
  r.params = PhysicalParams::symmetric(2, tau, phi);
  r.params.dt = snapped_dt(tau, 0.02);
  r.initial = "ee";
  return r;
}

RunSpec four_qubit(std::string name, double tau, const std::string& state) {
  RunSpec r;
  r.name = std::move(name);
  r.params = PhysicalParams::symmetric(4, tau, 0.0);
  r.initial = state;
  return r;
}

std::string tau_tag(double tau) {
  return tau == 0.0 ? "markov" : "gt" + format_shortest(tau);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig2a", "fig2b", "fig2c", "fig3", "fig4", "fig5", "fig6"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "fig2a") {
    c.runs = {two_qubit("fig2a", 0.0, 0.0)};
  } else if (name == "fig2b") {
    c.runs = {two_qubit("fig2b", 0.5, 0.0)};
  } else if (name == "fig2c") {
    c.runs = {two_qubit("fig2c", 2.0, 0.0)};
  } else if (name == "fig3") {
    for (double tau : {0.0, 0.375, 0.5, 0.895, 2.0}) {
      c.runs.push_back(two_qubit("fig3_" + tau_tag(tau), tau, 0.0));
    }
  } else if (name == "fig4") {
    c.runs.push_back(two_qubit("fig4_phi0", 0.5, 0.0));
    c.runs.push_back(two_qubit("fig4_phi_half_pi", 0.5, kPi / 2));
    c.runs.push_back(two_qubit("fig4_phi_pi", 0.5, kPi));
    c.runs.push_back(two_qubit("fig4_markov", 0.0, 0.0));
  } else if (name == "fig5") {
    for (double tau : {0.0, 0.1, 0.5, 2.0}) {
      c.runs.push_back(two_qubit("fig5_" + tau_tag(tau), tau, 0.0));
    }
  } else if (name == "fig6") {
    for (double tau : {0.5, 0.0}) {
      for (const char* s : {"A", "B", "C"}) {
        c.runs.push_back(four_qubit("fig6_" + std::string(s) + "_" + tau_tag(tau), tau, s));
      }
      c.runs.push_back(two_qubit("fig6_2tls_" + tau_tag(tau), tau, 0.0));
    }
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

namespace {

const std::set<std::string> kRunKeys = {"name", "n_qubits", "gamma_L", "gamma_R", "phi",
                                         "tau", "dt", "n_max", "omega0", "initial",
                                         "horizon", "stride", "truncation"};
const std::set<std::string> kTopKeys = {"preset", "runs", "out", "oracle_check", "deterministic"};
const std::set<std::string> kTruncationKeys = {"max_bond", "svd_cutoff", "forbid_truncation"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::set<std::string>& also, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key) && !also.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

RunSpec parse_run(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  reject_unknown(obj, kRunKeys, {}, where);
  RunSpec r;
  r.name = get<std::string>(obj, "name", "run");
  const int n = get<int>(obj, "n_qubits", 2);
  const double tau = get<double>(obj, "tau", 0.0);
  r.params = PhysicalParams::symmetric(n, tau, 0.0);
  if (obj.contains("gamma_L")) r.params.gamma_left = get<std::vector<double>>(obj, "gamma_L", {});
  if (obj.contains("gamma_R")) r.params.gamma_right = get<std::vector<double>>(obj, "gamma_R", {});
  if (obj.contains("omega0")) {
    r.params.omega0 = get<double>(obj, "omega0", 0.0);
    if (obj.contains("phi")) throw ConfigError("give either phi or omega0 in " + where);
    r.params.phi = phase_from_delay(*r.params.omega0, tau);
  } else {
    r.params.phi = get<double>(obj, "phi", 0.0);
  }
  r.params.dt = get<double>(obj, "dt", 0.02);
  r.params.n_max = get<int>(obj, "n_max", 2);
  r.initial = get<std::string>(obj, "initial", n == 2 ? "ee" : std::string(n, 'e'));
  r.horizon = get<double>(obj, "horizon", 5.0);
  const long stride = get<long>(obj, "stride", 1);
  if (stride < 1) throw ConfigError("stride must be at least 1");
  r.stride = static_cast<Index>(stride);
  if (obj.contains("truncation")) {
    const json& t = obj.at("truncation");
    if (!t.is_object()) throw ConfigError("truncation must be an object");
    reject_unknown(t, kTruncationKeys, {}, "truncation");
    const long max_bond = get<long>(t, "max_bond", 64);
    if (max_bond < 1) throw ConfigError("max_bond must be at least 1");
    r.truncation.max_bond = static_cast<Index>(max_bond);
    r.truncation.svd_cutoff = get<double>(t, "svd_cutoff", r.truncation.svd_cutoff);
    r.truncation.forbid_truncation = get<bool>(t, "forbid_truncation", false);
  }
  try {
    r.params.validate();
    r.truncation.validate();
    const auto init = initial_state_from_name(r.initial);
    if (init.n_qubits != n) throw ConfigError("initial state does not match n_qubits");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (r.steps() < r.params.delay_bins()) {
    throw ConfigError(where + ": horizon is shorter than the delay");
  }
  return r;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  if (doc.contains("preset")) {
    reject_unknown(doc, kTopKeys, {"dt"}, "config");
    if (doc.contains("runs")) throw ConfigError("give either a preset or runs");
    c = preset(get<std::string>(doc, "preset", ""));
    if (doc.contains("dt")) override_dt(c, get<double>(doc, "dt", 0.02));
  } else if (doc.contains("runs")) {
    reject_unknown(doc, kTopKeys, {}, "config");
    const json& runs = doc.at("runs");
    if (!runs.is_array() || runs.empty()) throw ConfigError("runs must be a non-empty array");
    for (Index i = 0; i < runs.size(); ++i) {
      c.runs.push_back(parse_run(runs.at(i), "runs[" + std::to_string(i) + "]"));
    }
  } else {
    reject_unknown(doc, kTopKeys, kRunKeys, "config");
    json run = json::object();
    for (const auto& [key, value] : doc.items()) {
      if (kRunKeys.contains(key)) run[key] = value;
    }
    c.runs.push_back(parse_run(run, "config"));
  }
  std::set<std::string> names;
  for (const auto& r : c.runs) {
    if (!names.insert(r.name).second) throw ConfigError("duplicate run name '" + r.name + "'");
  }
  c.out_dir = get<std::string>(doc, "out", c.out_dir);
  c.oracle_check = get<bool>(doc, "oracle_check", false);
  c.deterministic = get<bool>(doc, "deterministic", false);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return parse_config(doc);
}

RunConfig resolve_config(const std::string& preset_or_path) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset_or_path) != names.end()) {
    return preset(preset_or_path);
  }
  if (std::filesystem::exists(preset_or_path)) return load_config(preset_or_path);
  throw ConfigError("'" + preset_or_path + "' is neither a preset nor a config file");
}

RunConfig sweep(const RunSpec& base, const std::string& param, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  RunConfig c;
  const double target_dt = base.params.dt;
  for (double v : values) {
    RunSpec r = base;
    if (param == "tau") {
      r.params.tau = v;
      r.params.dt = snapped_dt(v, target_dt);
      if (r.params.omega0) r.params.phi = phase_from_delay(*r.params.omega0, v);
    } else if (param == "phi") {
      r.params.phi = v;
      r.params.omega0.reset();
    } else if (param == "dt") {
      r.params.dt = snapped_dt(r.params.tau, v);
    } else if (param == "horizon") {
      r.horizon = v;
    } else {
      throw ConfigError("cannot sweep '" + param + "' (use tau, phi, dt or horizon)");
    }
    r.name = base.name + "_" + param + format_shortest(v);
    try {
      r.params.validate();
    } catch (const std::exception& e) {
      throw ConfigError(r.name + ": " + e.what());
    }
    c.runs.push_back(std::move(r));
  }
  return c;
}

}  // namespace wgqed
