#pragma once

#include <span>
#include <vector>

#include "wgqed/engine.hpp"
#include "wgqed/series.hpp"

namespace wgqed {

/// Quantities that depend only on the qubit reduced density matrix.
struct SystemObservables {
  std::vector<double> n_tls;
  std::vector<double> probabilities;
  cplx corr_atoms{};
  /// Von Neumann entropy in bits divided by the number of qubits.
  double entropy = 0.0;
};

/// P_n = sum over configurations with exactly n excited qubits of the
/// product projector expectation. Two qubits: 1 + 2 + 1 terms; four qubits:
/// 1 + 4 + 6 + 4 + 1.
std::vector<double> excitation_probabilities(const Matrix& rho_system, int n_qubits);

SystemObservables system_observables(const Matrix& rho_system, int n_qubits);

/// Entropy in bits of a probability vector; entries below 1e-300 are skipped.
double entropy_bits(std::span<const double> p);

/// |sum_n n P_n + Nout_R + Nout_L + Nin_R + Nin_L - N0|.
double conservation_residual(const Sample& s, double initial_excitations);

/// Record every observable of the current simulation state. Only moves the
/// orthogonality center; the state vector is untouched.
Sample measure(Simulation& sim);

}  // namespace wgqed
