#pragma once

#include <span>
#include <string>
#include <vector>

#include "wgqed/types.hpp"

namespace wgqed {

/// Qubit register state over the 2^n configuration basis.
///
/// Basis index bit (n-1-q) holds qubit q, |g> = 0 and |e> = 1, so the
/// pattern "eg" is index 2. For four qubits the order is (1L, 2L, 1R, 2R).
struct InitialState {
  int n_qubits = 0;
  std::vector<cplx> amplitudes;
  std::string label;
  /// Factor the input amplitudes were multiplied by to reach unit norm.
  double normalization = 1.0;

  /// Expected number of excited qubits.
  double mean_excitations() const;
  /// Excitation number if every nonzero amplitude shares it, else -1.
  int definite_excitations() const;
};

/// Computational basis state from a string over {e, g}, one letter per qubit.
InitialState product_state(const std::string& pattern);

/// (|eg> + |ge>) (x) (|eg> + |ge>) / 2 on four qubits: one unknown excitation per pair.
InitialState state_C();

/// Normalized copy of arbitrary amplitudes (length must be a power of two).
InitialState custom(std::span<const cplx> amplitudes, std::string label = "custom");

/// Accepts a pattern, "A", "B" or "C".
InitialState initial_state_from_name(const std::string& name);

}  // namespace wgqed
