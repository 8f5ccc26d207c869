#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wgqed/kernels.hpp"
#include "wgqed/mps.hpp"
#include "wgqed/types.hpp"

namespace wgqed {

/// Which end of the waveguide gap a qubit sits at.
enum class QubitGroup { left, right };

/// Physical and discretization parameters of one run.
///
/// Rates are in units of the reference rate gamma, times in 1/gamma and
/// phases in radians. Qubits are ordered left group first: with two qubits
/// that is (1, 2); with four it is (1L, 2L, 1R, 2R).
struct PhysicalParams {
  int n_qubits = 2;
  std::vector<double> gamma_left;
  std::vector<double> gamma_right;
  double phi = 0.0;
  double tau = 0.0;
  double dt = 0.02;
  int n_max = 2;
  /// Carrier frequency; only consumed by phase_from_delay.
  std::optional<double> omega0;

  /// gamma_L = gamma_R = 1/2 for every qubit.
  static PhysicalParams symmetric(int n_qubits, double tau, double phi, double dt = 0.02,
                                  int n_max = 2);

  void validate() const;
  /// Number of bins l = tau / dt spanning the gap. Throws if tau is not a multiple of dt.
  Index delay_bins() const;
  bool markovian() const { return delay_bins() == 0; }
  Index bin_dim() const { return static_cast<Index>(n_max) + 1; }
  Index system_dim() const { return Index{1} << n_qubits; }
  QubitGroup group(int qubit) const;
};

/// Slots of the window the step gate acts on.
enum class WindowRole { delayed_left, delayed_right, system, current_right, current_left };

/// Precomputed unitary for one time step.
struct StepGate {
  BlockedGate gate;
  /// Window slots in chain order. With a delay this is
  /// (delayed-L, delayed-R, system, current-R, current-L); without one the
  /// delayed slots collapse onto the current bins and only
  /// (system, current-R, current-L) remain.
  std::vector<WindowRole> roles;
  Index delay_bins = 0;

  std::vector<Index> dims() const;
  Index slot(WindowRole role) const;
  double unitarity_error() const { return gate.unitarity_error(); }
  /// FNV-1a hash over the bit patterns of the gate entries.
  std::uint64_t checksum() const;
};

/// phi = -omega0 * tau folded into (-pi, pi].
double phase_from_delay(double omega0, double tau);

/// Markovian collective decay rate (units of gamma) of N emitters holding
/// `excitations` quanta: full (N), half (N/2, N even) or single excitation.
double dicke_rate(int atoms, int excitations);

/// exp(-i G) with G the time-bin coupling generator, built sector by sector
/// in the excitation-number basis.
StepGate build_step_gate(const PhysicalParams& params);

/// The same gate exponentiated through a Hermitian eigendecomposition of the
/// dense generator. Independent route used to cross-check build_step_gate.
Matrix step_gate_by_eigendecomposition(const PhysicalParams& params);

/// Dense generator G on the window basis.
Matrix step_generator(const PhysicalParams& params);

// Local operators. Basis |g> = 0, |e> = 1 per qubit; qubit 0 is the most
// significant bit of the system index. Bins use Fock states 0..n_max.
Matrix sigma_plus(int qubit, int n_qubits);
Matrix sigma_minus(int qubit, int n_qubits);
Matrix annihilation(int n_max);
Matrix number_operator(int n_max);
std::vector<cplx> vacuum(int n_max);

int popcount(Index x);

}  // namespace wgqed
