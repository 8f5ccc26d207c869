#include "wgqed/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace wgqed {

std::vector<double> excitation_probabilities(const Matrix& rho_system, int n_qubits) {
  const Index dim = Index{1} << n_qubits;
  if (static_cast<Index>(rho_system.rows()) != dim) {
    throw DimensionMismatch("system density matrix does not match the qubit count");
  }
  std::vector<double> p(static_cast<Index>(n_qubits) + 1, 0.0);
  for (Index config = 0; config < dim; ++config) {
    p[static_cast<Index>(popcount(config))] += rho_system(config, config).real();
  }
  return p;
}

double entropy_bits(std::span<const double> p) {
  double s = 0.0;
  for (double x : p) {
    if (x > 1e-300) s -= x * std::log2(x);
  }
  return std::max(s, 0.0);
}

SystemObservables system_observables(const Matrix& rho_system, int n_qubits) {
  SystemObservables out;
  out.probabilities = excitation_probabilities(rho_system, n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    const Matrix sp = sigma_plus(q, n_qubits);
    out.n_tls.push_back((rho_system * sp * sp.adjoint()).trace().real());
  }
  if (n_qubits >= 2) {
    out.corr_atoms = (rho_system * sigma_plus(0, n_qubits) * sigma_minus(1, n_qubits)).trace();
  }
  const Matrix herm = 0.5 * (rho_system + rho_system.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(herm, Eigen::EigenvaluesOnly);
  const RealVector& lambda = eig.eigenvalues();
  out.entropy = entropy_bits({lambda.data(), static_cast<Index>(lambda.size())}) / n_qubits;
  return out;
}

double conservation_residual(const Sample& s, double initial_excitations) {
  double total = s.Nout_R + s.Nout_L + s.Nin_R + s.Nin_L - initial_excitations;
  for (Index n = 0; n < s.probabilities.size(); ++n) total += static_cast<double>(n) * s.P(n);
  return std::abs(total);
}

Sample measure(Simulation& sim) {
  const PhysicalParams& p = sim.params();
  MpsChain& chain = sim.chain();
  const BinRegistry& reg = sim.registry();
  const Index sys = reg.system_position();
  const long k = static_cast<long>(sim.steps_done());
  const long l = static_cast<long>(reg.delay_bins());
  const double dt = p.dt;

  Sample s;
  s.t = sim.time();

  chain.canonicalize(sys);
  const auto so = system_observables(chain.reduced_density(sys), p.n_qubits);
  s.n_tls = so.n_tls;
  s.probabilities = so.probabilities;
  s.corr_atoms = so.corr_atoms;
  s.S_a = so.entropy;
  if (sys + 1 < chain.size()) {
    const auto spectrum = chain.schmidt_at_bond(sys);
    s.S_c = spectrum.entropy_bits() / p.n_qubits;
  }

  const Matrix n_op = number_operator(p.n_max);
  if (sys > 0) {
    const auto rho = chain.reduced_densities(0, sys - 1);
    for (Index i = 0; i < sys; ++i) {
      const double n = (rho[i] * n_op).trace().real();
      (chain.label(i).direction == Direction::right ? s.Nin_R : s.Nin_L) += n;
    }
  }

  s.Nout_R = sim.released_total(Direction::right);
  s.Nout_L = sim.released_total(Direction::left);
  if (k > 0) {
    s.nout_R = sim.released_last(Direction::right) / dt;
    s.nout_L = sim.released_last(Direction::left) / dt;
    const long released = k - 1 - l;
    const auto pos_r = reg.position(released, Direction::right);
    const auto pos_l = reg.position(released, Direction::left);
    if (!pos_r || !pos_l) throw std::logic_error("released bins missing from the chain");
    const Matrix rho_r = chain.reduced_density(*pos_r);
    const Matrix a = annihilation(p.n_max);
    const Matrix ad = a.adjoint();
    s.g1_R = (rho_r * n_op).trace().real() / dt;
    s.g2_R = (rho_r * ad * ad * a * a).trace().real() / (dt * dt);
    const LocalOperator ops[2] = {{*pos_l, ad}, {*pos_r, a}};
    s.corr_LR = chain.expect_local(ops) / dt;
  }

  // Atom-field correlation against the right-moving bin that enters the
  // window next step. Without a delay that bin is always fresh vacuum.
  s.corr_af.assign(static_cast<Index>(p.n_qubits), cplx{});
  if (l > 0) {
    const auto pos = reg.position(k - l, Direction::right);
    if (!pos) throw std::logic_error("incoming loop bin missing from the chain");
    const Matrix a = annihilation(p.n_max);
    for (int q = 0; q < p.n_qubits; ++q) {
      const LocalOperator ops[2] = {{sys, sigma_plus(q, p.n_qubits)}, {*pos, a}};
      s.corr_af[static_cast<Index>(q)] = chain.expect_local(ops) / std::sqrt(dt);
    }
  }

  s.trunc_weight = chain.truncation_weight();
  // The center is still on the system site, so the norm lives there.
  chain.canonicalize(sys);
  s.norm = chain.site(sys).left_matrix().squaredNorm();
  s.cons_residual = conservation_residual(s, sim.initial_excitations());
  return s;
}

std::vector<std::string> ObservableSeries::columns() const {
  std::vector<std::string> c{"t"};
  for (int q = 1; q <= n_qubits; ++q) c.push_back("n_tls_" + std::to_string(q));
  for (const char* name : {"P0", "P1", "P2", "nout_R", "nout_L", "Nout_R", "Nout_L", "Nin_R",
                           "Nin_L", "S_a", "S_c", "g1_R", "g2_R", "corr_LR_re", "corr_LR_im",
                           "corr_atoms_re", "corr_atoms_im"}) {
    c.emplace_back(name);
  }
  for (int q = 1; q <= n_qubits; ++q) {
    c.push_back("corr_af_" + std::to_string(q) + "_re");
    c.push_back("corr_af_" + std::to_string(q) + "_im");
  }
  c.emplace_back("cons_residual");
  c.emplace_back("trunc_weight");
  return c;
}

namespace {

double field(const Sample& s, const std::string& name) {
  if (name == "t") return s.t;
  if (name.rfind("n_tls_", 0) == 0) return s.n_tls.at(std::stoul(name.substr(6)) - 1);
  if (name.size() == 2 && name[0] == 'P') return s.P(static_cast<Index>(name[1] - '0'));
  if (name == "nout_R") return s.nout_R;
  if (name == "nout_L") return s.nout_L;
  if (name == "Nout_R") return s.Nout_R;
  if (name == "Nout_L") return s.Nout_L;
  if (name == "Nin_R") return s.Nin_R;
  if (name == "Nin_L") return s.Nin_L;
  if (name == "S_a") return s.S_a;
  if (name == "S_c") return s.S_c;
  if (name == "g1_R") return s.g1_R;
  if (name == "g2_R") return s.g2_R;
  if (name == "corr_LR_re") return s.corr_LR.real();
  if (name == "corr_LR_im") return s.corr_LR.imag();
  if (name == "corr_atoms_re") return s.corr_atoms.real();
  if (name == "corr_atoms_im") return s.corr_atoms.imag();
  if (name.rfind("corr_af_", 0) == 0) {
    const auto sep = name.find('_', 8);
    const auto q = std::stoul(name.substr(8, sep - 8)) - 1;
    const cplx v = s.corr_af.at(q);
    return name.substr(sep + 1) == "re" ? v.real() : v.imag();
  }
  if (name == "cons_residual") return s.cons_residual;
  if (name == "trunc_weight") return s.trunc_weight;
  if (name == "norm") return s.norm;
  throw std::out_of_range("unknown column " + name);
}

}  // namespace

std::vector<double> ObservableSeries::column(const std::string& name) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(field(s, name));
  return out;
}

std::vector<double> ObservableSeries::times() const { return column("t"); }

const Sample& ObservableSeries::at(double t) const {
  if (samples.empty()) throw std::out_of_range("empty series");
  const auto it = std::min_element(samples.begin(), samples.end(), [t](const auto& a, const auto& b) {
    return std::abs(a.t - t) < std::abs(b.t - t);
  });
  return *it;
}

}  // namespace wgqed
