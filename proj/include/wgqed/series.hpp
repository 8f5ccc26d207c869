#pragma once

#include <string>
#include <vector>

#include "wgqed/types.hpp"

namespace wgqed {

/// Every quantity recorded at one sample time.
///
/// Field operators are normalized per quantum: b = a / sqrt(dt) for a bin
/// annihilator a, so g1_R = <a^dag a>/dt, g2_R = <a^dag a^dag a a>/dt^2 and
/// the atom-field correlators carry 1/sqrt(dt).
struct Sample {
  double t = 0.0;
  std::vector<double> n_tls;
  /// probabilities[n]: exactly n qubits excited, n = 0..n_qubits.
  std::vector<double> probabilities;
  double nout_R = 0.0;
  double nout_L = 0.0;
  double Nout_R = 0.0;
  double Nout_L = 0.0;
  double Nin_R = 0.0;
  double Nin_L = 0.0;
  double S_a = 0.0;
  double S_c = 0.0;
  double g1_R = 0.0;
  double g2_R = 0.0;
  cplx corr_LR{};
  cplx corr_atoms{};
  std::vector<cplx> corr_af;
  double cons_residual = 0.0;
  double trunc_weight = 0.0;
  /// <psi|psi> audit.
  double norm = 1.0;

  double P(Index n) const { return n < probabilities.size() ? probabilities[n] : 0.0; }
};

struct ObservableSeries {
  int n_qubits = 2;
  double dt = 0.0;
  std::vector<Sample> samples;
  std::vector<std::string> warnings;
  /// Largest discarded weight of a single step.
  double max_step_truncation = 0.0;
  Index max_bond = 1;

  /// Column names in output order.
  std::vector<std::string> columns() const;
  /// One column by name; throws std::out_of_range for unknown names.
  std::vector<double> column(const std::string& name) const;
  std::vector<double> times() const;
  /// Sample whose time is closest to t.
  const Sample& at(double t) const;
};

inline constexpr int kSeriesSchemaVersion = 1;

}  // namespace wgqed
