#include "wgqed/engine.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wgqed/observables.hpp"

namespace wgqed {

void BinRegistry::refresh(const MpsChain& chain) {
  positions_.clear();
  bijective_ = true;
  Index systems = 0;
  for (Index i = 0; i < chain.size(); ++i) {
    const auto& lab = chain.label(i);
    if (lab.is_system()) {
      system_position_ = i;
      ++systems;
      continue;
    }
    if (!positions_.emplace(key(lab.time, lab.direction), i).second) bijective_ = false;
  }
  if (systems != 1) bijective_ = false;
}

std::optional<Index> BinRegistry::position(long time, Direction direction) const {
  const auto it = positions_.find(key(time, direction));
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

std::vector<long> BinRegistry::loop_window(Index steps_done) const {
  std::vector<long> out;
  const long k = static_cast<long>(steps_done);
  for (long t = k - static_cast<long>(delay_bins_); t < k; ++t) {
    if (t >= 0) out.push_back(t);
  }
  return out;
}

Index steps_for_horizon(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw std::invalid_argument("horizon and dt must be positive");
  const double ratio = horizon / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) +
                                " is not an integer multiple of dt " + std::to_string(dt));
  }
  return static_cast<Index>(rounded);
}

namespace {

MpsChain initial_chain(const PhysicalParams& p, const InitialState& initial) {
  const Index l = p.delay_bins();
  std::vector<std::vector<cplx>> locals;
  std::vector<SiteLabel> labels;
  const auto vac = vacuum(p.n_max);
  for (Index j = 0; j < l; ++j) {
    const long t = static_cast<long>(j) - static_cast<long>(l);
    locals.push_back(vac);
    labels.push_back(SiteLabel::bin(Direction::left, t));
    locals.push_back(vac);
    labels.push_back(SiteLabel::bin(Direction::right, t));
  }
  locals.push_back(initial.amplitudes);
  labels.push_back(SiteLabel::system());
  return MpsChain::product(locals, std::move(labels));
}

int dir_index(Direction d) { return d == Direction::left ? 0 : 1; }

}  // namespace

Simulation::Simulation(const PhysicalParams& params, const InitialState& initial,
                       Index horizon_steps, EngineOptions options)
    : Simulation(params, initial, horizon_steps, build_step_gate(params), std::move(options)) {}

Simulation::Simulation(const PhysicalParams& params, const InitialState& initial,
                       Index horizon_steps, StepGate gate, EngineOptions options)
    : params_(params),
      options_(std::move(options)),
      gate_(std::move(gate)),
      chain_((params.validate(), initial_chain(params, initial))),
      registry_(params.delay_bins()),
      horizon_steps_(horizon_steps) {
  options_.truncation.validate();
  if (initial.n_qubits != params.n_qubits) {
    throw std::invalid_argument("initial state has " + std::to_string(initial.n_qubits) +
                                " qubits, parameters " + std::to_string(params.n_qubits));
  }
  if (gate_.delay_bins != params.delay_bins() || gate_.dims().size() != gate_.roles.size()) {
    throw std::invalid_argument("step gate does not match the parameters");
  }
  if (horizon_steps < params.delay_bins()) {
    throw std::invalid_argument("horizon of " + std::to_string(horizon_steps) +
                                " steps is shorter than the delay of " +
                                std::to_string(params.delay_bins()) + " bins");
  }
  initial_excitations_ = initial.mean_excitations();
  registry_.refresh(chain_);
}

double Simulation::released_total(Direction d) const { return released_total_[dir_index(d)]; }
double Simulation::released_last(Direction d) const { return released_last_[dir_index(d)]; }

// Moves the oldest loop pair (sites 0, 1) to just left of the system. The
// pair travels together, one site per two swaps, so the orthogonality
// center only ever moves forward.
void Simulation::bring_delayed_pair_in() {
  const Index l = registry_.delay_bins();
  if (l < 2) return;
  double w = 0.0;
  for (Index j = 0; j + 2 < 2 * l; ++j) {
    w += chain_.swap_adjacent(j + 1, options_.truncation, false);
    w += chain_.swap_adjacent(j, options_.truncation, true);
  }
  last_step_truncation_ += w;
}

void Simulation::step() {
  if (steps_done_ >= horizon_steps_) throw std::out_of_range("simulation horizon reached");
  const Index l = registry_.delay_bins();
  const long k = static_cast<long>(steps_done_);
  const Index sys = registry_.system_position();
  last_step_truncation_ = 0.0;

  const auto vac = vacuum(params_.n_max);
  chain_.insert_product_site(sys + 1, vac, SiteLabel::bin(Direction::right, k));
  chain_.insert_product_site(sys + 2, vac, SiteLabel::bin(Direction::left, k));

  Index first = sys;
  std::vector<Index> order;
  if (l >= 1) {
    bring_delayed_pair_in();
    first = sys - 2;
    // [dL dR S cR cL] -> [cL cR S dL dR]: the fresh pair joins the loop as
    // (L, R) and the delayed pair leaves to the right of the system.
    order = {4, 3, 2, 0, 1};
  }
  last_step_truncation_ +=
      chain_.apply_gate(gate_.gate, first, options_.truncation, options_.execution, order);

  registry_.refresh(chain_);
  if (registry_.system_position() != sys) throw std::logic_error("system site drifted");

  // Released pair sits at sys+1, sys+2; the center is already there.
  const auto rho = chain_.reduced_densities(sys + 1, sys + 2);
  const Matrix n_op = number_operator(params_.n_max);
  for (Index j = 0; j < 2; ++j) {
    const Direction d = chain_.label(sys + 1 + j).direction;
    const double n = (rho[j] * n_op).trace().real();
    released_last_[dir_index(d)] = n;
    released_total_[dir_index(d)] += n;
  }

  max_step_truncation_ = std::max(max_step_truncation_, last_step_truncation_);
  if (last_step_truncation_ > options_.warn_truncation) {
    warnings_.push_back("step " + std::to_string(k) + ": discarded weight " +
                        std::to_string(last_step_truncation_));
  }
  ++steps_done_;
}

ObservableSeries run(const PhysicalParams& params, const InitialState& initial, double horizon,
                     Index stride, const EngineOptions& options) {
  if (stride == 0) throw std::invalid_argument("stride must be at least 1");
  params.validate();
  const Index steps = steps_for_horizon(horizon, params.dt);
  Simulation sim(params, initial, steps, options);
  ObservableSeries series;
  series.n_qubits = params.n_qubits;
  series.dt = params.dt;
  series.samples.push_back(measure(sim));
  for (Index s = 0; s < steps; ++s) {
    sim.step();
    if (sim.steps_done() % stride == 0) series.samples.push_back(measure(sim));
    series.max_bond = std::max(series.max_bond, sim.chain().max_bond_dimension());
  }
  series.warnings = sim.warnings();
  series.max_step_truncation = sim.max_step_truncation();
  return series;
}

}  // namespace wgqed
