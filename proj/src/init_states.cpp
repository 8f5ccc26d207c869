#include "wgqed/init_states.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace wgqed {

double InitialState::mean_excitations() const {
  double n = 0.0;
  for (Index q = 0; q < amplitudes.size(); ++q) n += std::norm(amplitudes[q]) * std::popcount(q);
  return n;
}

int InitialState::definite_excitations() const {
  int count = -1;
  for (Index q = 0; q < amplitudes.size(); ++q) {
    if (amplitudes[q] == cplx{}) continue;
    const int e = std::popcount(q);
    if (count >= 0 && count != e) return -1;
    count = e;
  }
  return count;
}

InitialState product_state(const std::string& pattern) {
  if (pattern.empty() || pattern.size() > 4) {
    throw std::invalid_argument("pattern must name between 1 and 4 qubits: '" + pattern + "'");
  }
  Index index = 0;
  for (char c : pattern) {
    if (c != 'e' && c != 'g') {
      throw std::invalid_argument("pattern may only contain 'e' and 'g': '" + pattern + "'");
    }
    index = (index << 1) | (c == 'e' ? 1U : 0U);
  }
  InitialState s;
  s.n_qubits = static_cast<int>(pattern.size());
  s.amplitudes.assign(Index{1} << pattern.size(), cplx{});
  s.amplitudes[index] = 1.0;
  s.label = pattern;
  return s;
}

InitialState state_C() {
  // Left pair and right pair each in the symmetric single-excitation state.
  const double h = 1.0 / std::sqrt(2.0);
  const std::vector<cplx> pair = {0.0, h, h, 0.0};  // (|eg> + |ge>)/sqrt2 over (g,e) bits
  InitialState s;
  s.n_qubits = 4;
  s.amplitudes.assign(16, cplx{});
  for (Index l = 0; l < 4; ++l) {
    for (Index r = 0; r < 4; ++r) s.amplitudes[(l << 2) | r] = pair[l] * pair[r];
  }
  s.label = "C";
  return s;
}

InitialState custom(std::span<const cplx> amplitudes, std::string label) {
  const Index dim = amplitudes.size();
  if (dim < 2 || !std::has_single_bit(dim) || dim > 16) {
    throw std::invalid_argument("amplitude count must be 2^n with n in 1..4");
  }
  double n2 = 0.0;
  for (const auto& a : amplitudes) n2 += std::norm(a);
  if (n2 == 0.0) throw std::invalid_argument("initial state amplitudes are all zero");
  InitialState s;
  s.n_qubits = std::countr_zero(dim);
  s.normalization = 1.0 / std::sqrt(n2);
  s.amplitudes.reserve(dim);
  for (const auto& a : amplitudes) s.amplitudes.push_back(a * s.normalization);
  s.label = std::move(label);
  return s;
}

InitialState initial_state_from_name(const std::string& name) {
  if (name == "A") {
    auto s = product_state("egeg");
    s.label = "A";
    return s;
  }
  if (name == "B") {
    auto s = product_state("eegg");
    s.label = "B";
    return s;
  }
  if (name == "C") return state_C();
  return product_state(name);
}

}  // namespace wgqed
