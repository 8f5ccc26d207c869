#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "wgqed/init_states.hpp"
#include "wgqed/model.hpp"
#include "wgqed/mps.hpp"
#include "wgqed/series.hpp"

namespace wgqed {

struct EngineOptions {
  TruncationPolicy truncation;
  ExecutionPolicy execution;
  /// Per-step discarded weight above which a warning is recorded.
  double warn_truncation = 1e-6;
};

/// Where every time bin currently sits in the chain.
///
/// After step k the chain reads
///   [loop bins k-l+1 .. k as (L, R) pairs, oldest first] [system] [released bins, newest first]
/// so the system plus the loop is always a prefix of the chain. Before the
/// first step the loop holds l vacuum ancilla pairs with negative time
/// indices; they stand in for field that passed the far emitter before t = 0.
class BinRegistry {
 public:
  explicit BinRegistry(Index delay_bins) : delay_bins_(delay_bins) {}

  void refresh(const MpsChain& chain);

  std::optional<Index> position(long time, Direction direction) const;
  Index system_position() const { return system_position_; }
  Index delay_bins() const { return delay_bins_; }

  /// Time indices inside the feedback loop once `steps_done` steps have run,
  /// excluding start-up ancillas.
  std::vector<long> loop_window(Index steps_done) const;

  /// True when every non-system site has a distinct bin label.
  bool bijective() const { return bijective_; }

 private:
  static long key(long time, Direction d) { return 2 * time + (d == Direction::right ? 1 : 0); }

  Index delay_bins_;
  Index system_position_ = 0;
  std::unordered_map<long, Index> positions_;
  bool bijective_ = true;
};

/// One simulation: chain, registry, gate and audits.
class Simulation {
 public:
  Simulation(const PhysicalParams& params, const InitialState& initial, Index horizon_steps,
             EngineOptions options = {});
  /// Use a prebuilt (possibly deliberately broken) gate.
  Simulation(const PhysicalParams& params, const InitialState& initial, Index horizon_steps,
             StepGate gate, EngineOptions options = {});

  /// Advance by one time bin.
  void step();

  Index steps_done() const { return steps_done_; }
  Index horizon_steps() const { return horizon_steps_; }
  double time() const { return static_cast<double>(steps_done_) * params_.dt; }

  const PhysicalParams& params() const { return params_; }
  const StepGate& gate() const { return gate_; }
  const EngineOptions& options() const { return options_; }
  const MpsChain& chain() const { return chain_; }
  MpsChain& chain() { return chain_; }
  const BinRegistry& registry() const { return registry_; }

  double initial_excitations() const { return initial_excitations_; }
  /// Photons carried out by all bins released so far.
  double released_total(Direction d) const;
  /// Photons carried by the bin released in the most recent step.
  double released_last(Direction d) const;
  double last_step_truncation() const { return last_step_truncation_; }
  double max_step_truncation() const { return max_step_truncation_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void bring_delayed_pair_in();

  PhysicalParams params_;
  EngineOptions options_;
  StepGate gate_;
  MpsChain chain_;
  BinRegistry registry_;
  Index horizon_steps_;
  Index steps_done_ = 0;
  double initial_excitations_ = 0.0;
  double released_total_[2] = {0.0, 0.0};
  double released_last_[2] = {0.0, 0.0};
  double last_step_truncation_ = 0.0;
  double max_step_truncation_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Number of steps covering `horizon`; throws unless horizon/dt is integral.
Index steps_for_horizon(double horizon, double dt);

/// Evolve to `horizon` (units 1/gamma) and record every `stride` steps.
ObservableSeries run(const PhysicalParams& params, const InitialState& initial, double horizon,
                     Index stride, const EngineOptions& options = {});

}  // namespace wgqed
