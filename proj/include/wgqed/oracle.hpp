#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgqed/init_states.hpp"
#include "wgqed/model.hpp"
#include "wgqed/series.hpp"

namespace wgqed {

/// Basis state of the sector representation: a qubit configuration plus a
/// multiset of occupied field modes, packed into one word.
///
/// Bits 0..3 hold the qubit configuration. Four 13-bit fields above hold
/// the occupied modes in ascending order (0 = empty slot), mode id
/// 2 * time + (R ? 1 : 0) + 1. Each photon takes one slot, so a doubly
/// occupied mode appears twice. Key time is the bin index shifted by the
/// delay l, so the start-up bins -l..-1 get non-negative ids.
class SectorKey {
 public:
  static constexpr int kSlots = 4;
  static constexpr int kModeBits = 13;
  static constexpr long kMaxTime = ((1L << kModeBits) - 2) / 2;

  static std::uint64_t pack(Index config, std::vector<std::uint32_t> modes);
  static Index config(std::uint64_t key) { return static_cast<Index>(key & 0xF); }
  static std::vector<std::uint32_t> modes(std::uint64_t key);

  static std::uint32_t mode_id(long time, bool right) {
    return static_cast<std::uint32_t>(2 * time + (right ? 1 : 0) + 1);
  }
  static long mode_time(std::uint32_t id) { return static_cast<long>(id - 1) / 2; }
  static bool mode_right(std::uint32_t id) { return ((id - 1) & 1U) != 0; }
};

/// Enumerates the reachable basis: index maps in both directions over the
/// keys currently carrying amplitude.
class SectorBasis {
 public:
  SectorBasis() = default;
  explicit SectorBasis(std::vector<std::uint64_t> keys);

  Index size() const { return keys_.size(); }
  std::uint64_t key(Index i) const { return keys_.at(i); }
  /// Index of a key, or size() if absent.
  Index find(std::uint64_t key) const;
  const std::vector<std::uint64_t>& keys() const { return keys_; }

 private:
  std::vector<std::uint64_t> keys_;
};

struct SectorState {
  SectorBasis basis;
  std::vector<cplx> amplitudes;
  Index step = 0;

  double norm_squared() const;
};

struct OracleOptions {
  ExecutionPolicy execution;
  /// Largest excitation number the sector may hold (at most 4).
  int e_max = 2;
  Index max_states = 5'000'000;
};

/// Exact evolution of the whole state in the excitation-conserving sector.
class SectorSimulation {
 public:
  SectorSimulation(const PhysicalParams& params, const InitialState& initial,
                   OracleOptions options = {});
  SectorSimulation(const PhysicalParams& params, const InitialState& initial, StepGate gate,
                   OracleOptions options = {});

  void step();
  Sample measure() const;

  const SectorState& state() const { return state_; }
  const PhysicalParams& params() const { return params_; }

 private:
  PhysicalParams params_;
  OracleOptions options_;
  StepGate gate_;
  SectorState state_;
  double initial_excitations_ = 0.0;
};

/// Sector step kernels. Both produce the identical key-sorted state.
SectorState sector_step_serial(const SectorState& in, const StepGate& gate);
SectorState sector_step_parallel(const SectorState& in, const StepGate& gate);

/// Dense run recording every `stride` steps, on the same grid as run().
ObservableSeries evolve_dense(const PhysicalParams& params, const InitialState& initial,
                              double horizon, Index stride, const OracleOptions& options = {});

struct FieldDeviation {
  std::string field;
  double max_abs = 0.0;
  /// First sample time where the deviation exceeds the tolerance, or -1.
  double first_exceeding_t = -1.0;
  bool pass = true;
};

struct ComparisonReport {
  std::vector<FieldDeviation> fields;
  bool pass() const;
  double max_abs() const;
  std::string summary() const;
};

/// Per-field comparison on a common time grid. An empty field list means
/// every column except t.
ComparisonReport compare(const ObservableSeries& a, const ObservableSeries& b,
                         std::vector<std::string> fields, double tol);

}  // namespace wgqed
