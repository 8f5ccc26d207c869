#include "wgqed/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace wgqed {

int popcount(Index x) { return std::popcount(x); }

PhysicalParams PhysicalParams::symmetric(int n_qubits, double tau, double phi, double dt,
                                         int n_max) {
  PhysicalParams p;
  p.n_qubits = n_qubits;
  p.gamma_left.assign(static_cast<Index>(n_qubits), 0.5);
  p.gamma_right.assign(static_cast<Index>(n_qubits), 0.5);
  p.tau = tau;
  p.phi = phi;
  p.dt = dt;
  p.n_max = n_max;
  return p;
}

void PhysicalParams::validate() const {
  if (n_qubits < 1 || n_qubits > 4) throw std::invalid_argument("n_qubits must be in 1..4");
  if (gamma_left.size() != static_cast<Index>(n_qubits) ||
      gamma_right.size() != static_cast<Index>(n_qubits)) {
    throw std::invalid_argument("one gamma_L and gamma_R entry per qubit is required");
  }
  for (Index q = 0; q < gamma_left.size(); ++q) {
    if (!(gamma_left[q] >= 0.0) || !(gamma_right[q] >= 0.0)) {
      throw std::invalid_argument("decay rates must be non-negative");
    }
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
  if (n_max < 1 || n_max > 4) throw std::invalid_argument("n_max must be in 1..4");
  if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
  (void)delay_bins();
}

Index PhysicalParams::delay_bins() const {
  const double ratio = tau / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("tau = " + std::to_string(tau) +
                                " is not an integer multiple of dt = " + std::to_string(dt));
  }
  return static_cast<Index>(rounded);
}

QubitGroup PhysicalParams::group(int qubit) const {
  return qubit < (n_qubits + 1) / 2 ? QubitGroup::left : QubitGroup::right;
}

std::vector<Index> StepGate::dims() const {
  const auto d = gate.site_dims();
  return {d.begin(), d.end()};
}

Index StepGate::slot(WindowRole role) const {
  const auto it = std::find(roles.begin(), roles.end(), role);
  if (it == roles.end()) throw std::invalid_argument("gate has no such window slot");
  return static_cast<Index>(it - roles.begin());
}

std::uint64_t StepGate::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, Index n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (Index i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& blk : gate.blocks()) {
    for (Index r = 0; r < blk.indices.size(); ++r) {
      const auto w = static_cast<std::uint64_t>(blk.indices[r]);
      mix(&w, sizeof w);
      for (Index c = 0; c < blk.indices.size(); ++c) {
        const double parts[2] = {blk.matrix(r, c).real(), blk.matrix(r, c).imag()};
        mix(parts, sizeof parts);
      }
    }
  }
  return h;
}

double phase_from_delay(double omega0, double tau) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double phi = std::fmod(-omega0 * tau, two_pi);
  if (phi > std::numbers::pi) phi -= two_pi;
  if (phi <= -std::numbers::pi) phi += two_pi;
  return phi + 0.0;
}

double dicke_rate(int atoms, int excitations) {
  if (atoms < 1) throw std::invalid_argument("dicke_rate needs at least one atom");
  if (excitations == atoms || excitations == 1) return static_cast<double>(atoms);
  if (atoms % 2 == 0 && excitations == atoms / 2) {
    const double half = atoms / 2.0;
    return half * (half + 1.0);
  }
  throw std::invalid_argument("unsupported excitation pattern: " + std::to_string(excitations) +
                              " of " + std::to_string(atoms));
}

namespace {

struct Coupling {
  int qubit;
  WindowRole role;
  cplx amplitude;  // multiplies sqrt(dt) * a_role * sigma_plus
};

struct WindowLayout {
  std::vector<WindowRole> roles;
  std::vector<Index> dims;
  Index dimension = 1;
};

WindowLayout window_layout(const PhysicalParams& p) {
  WindowLayout w;
  if (p.markovian()) {
    w.roles = {WindowRole::system, WindowRole::current_right, WindowRole::current_left};
  } else {
    w.roles = {WindowRole::delayed_left, WindowRole::delayed_right, WindowRole::system,
               WindowRole::current_right, WindowRole::current_left};
  }
  for (auto r : w.roles) w.dims.push_back(r == WindowRole::system ? p.system_dim() : p.bin_dim());
  for (auto d : w.dims) w.dimension *= d;
  return w;
}

// Left-group qubits see the current left-moving bin and the delayed
// right-moving one; right-group qubits the mirror image. The delayed
// partner carries the propagation phase e^{i phi}.
std::vector<Coupling> couplings(const PhysicalParams& p) {
  const bool markov = p.markovian();
  const cplx phase = std::polar(1.0, p.phi);
  std::vector<Coupling> out;
  for (int q = 0; q < p.n_qubits; ++q) {
    const double gl = std::sqrt(p.gamma_left[static_cast<Index>(q)]);
    const double gr = std::sqrt(p.gamma_right[static_cast<Index>(q)]);
    if (p.group(q) == QubitGroup::left) {
      out.push_back({q, WindowRole::current_left, gl});
      out.push_back({q, markov ? WindowRole::current_right : WindowRole::delayed_right, gr * phase});
    } else {
      out.push_back({q, markov ? WindowRole::current_left : WindowRole::delayed_left, gl * phase});
      out.push_back({q, WindowRole::current_right, gr});
    }
  }
  return out;
}

std::vector<Index> decode(Index w, const std::vector<Index>& dims) {
  std::vector<Index> digits(dims.size());
  for (Index j = dims.size(); j-- > 0;) {
    digits[j] = w % dims[j];
    w /= dims[j];
  }
  return digits;
}

Index encode(const std::vector<Index>& digits, const std::vector<Index>& dims) {
  Index w = 0;
  for (Index j = 0; j < dims.size(); ++j) w = w * dims[j] + digits[j];
  return w;
}

// Visits every nonzero entry G[target, source] of the generator.
template <typename Visit>
void for_each_generator_entry(const PhysicalParams& p, const WindowLayout& layout, Visit&& visit) {
  const auto terms = couplings(p);
  const Index sys = static_cast<Index>(
      std::find(layout.roles.begin(), layout.roles.end(), WindowRole::system) -
      layout.roles.begin());
  const double sqrt_dt = std::sqrt(p.dt);
  for (Index w = 0; w < layout.dimension; ++w) {
    const auto digits = decode(w, layout.dims);
    for (const auto& t : terms) {
      if (t.amplitude == cplx{}) continue;
      const Index slot = static_cast<Index>(
          std::find(layout.roles.begin(), layout.roles.end(), t.role) - layout.roles.begin());
      const Index bit = Index{1} << (p.n_qubits - 1 - t.qubit);
      const Index photons = digits[slot];
      if ((digits[sys] & bit) != 0 || photons == 0) continue;
      // a_role sigma_plus: absorb one photon, excite the qubit.
      auto raised = digits;
      raised[sys] |= bit;
      raised[slot] -= 1;
      const Index target = encode(raised, layout.dims);
      const cplx v = t.amplitude * sqrt_dt * std::sqrt(static_cast<double>(photons));
      visit(target, w, v);
      visit(w, target, std::conj(v));
    }
  }
}

Index excitations(Index w, const WindowLayout& layout) {
  const auto digits = decode(w, layout.dims);
  Index n = 0;
  for (Index j = 0; j < digits.size(); ++j) {
    n += layout.roles[j] == WindowRole::system ? static_cast<Index>(popcount(digits[j]))
                                               : digits[j];
  }
  return n;
}

}  // namespace

Matrix step_generator(const PhysicalParams& params) {
  params.validate();
  const auto layout = window_layout(params);
  Matrix g = Matrix::Zero(layout.dimension, layout.dimension);
  for_each_generator_entry(params, layout,
                           [&](Index r, Index c, cplx v) { g(r, c) += v; });
  return g;
}

StepGate build_step_gate(const PhysicalParams& params) {
  params.validate();
  const auto layout = window_layout(params);

  std::map<Index, std::vector<Index>> sectors;
  std::vector<Index> sector_of(layout.dimension);
  std::vector<Index> row_of(layout.dimension);
  for (Index w = 0; w < layout.dimension; ++w) {
    sector_of[w] = excitations(w, layout);
    auto& members = sectors[sector_of[w]];
    row_of[w] = members.size();
    members.push_back(w);
  }

  std::map<Index, Matrix> generators;
  for (const auto& [n, members] : sectors) {
    generators[n] = Matrix::Zero(members.size(), members.size());
  }
  for_each_generator_entry(params, layout, [&](Index r, Index c, cplx v) {
    if (sector_of[r] != sector_of[c]) {
      throw std::logic_error("generator couples different excitation sectors");
    }
    generators[sector_of[r]](row_of[r], row_of[c]) += v;
  });

  std::vector<GateBlock> blocks;
  for (auto& [n, members] : sectors) {
    GateBlock blk;
    blk.indices = members;
    const Matrix exponent = cplx(0.0, -1.0) * generators[n];
    blk.matrix = exponent.exp();
    blocks.push_back(std::move(blk));
  }

  StepGate gate{BlockedGate(layout.dims, std::move(blocks)), layout.roles,
                params.delay_bins()};
  const double err = gate.unitarity_error();
  if (err > 1e-8) {
    throw std::runtime_error("step gate is not unitary (error " + std::to_string(err) + ")");
  }
  return gate;
}

Matrix step_gate_by_eigendecomposition(const PhysicalParams& params) {
  const Matrix g = step_generator(params);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const RealVector& lambda = eig.eigenvalues();
  Vector phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) phases(i) = std::polar(1.0, -lambda(i));
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

Matrix sigma_plus(int qubit, int n_qubits) {
  const Index dim = Index{1} << n_qubits;
  const Index bit = Index{1} << (n_qubits - 1 - qubit);
  Matrix m = Matrix::Zero(dim, dim);
  for (Index q = 0; q < dim; ++q) {
    if ((q & bit) == 0) m(q | bit, q) = 1.0;
  }
  return m;
}

Matrix sigma_minus(int qubit, int n_qubits) { return sigma_plus(qubit, n_qubits).adjoint(); }

Matrix annihilation(int n_max) {
  const Index d = static_cast<Index>(n_max) + 1;
  Matrix a = Matrix::Zero(d, d);
  for (Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix number_operator(int n_max) {
  const Index d = static_cast<Index>(n_max) + 1;
  Matrix n = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

std::vector<cplx> vacuum(int n_max) {
  std::vector<cplx> v(static_cast<Index>(n_max) + 1);
  v[0] = 1.0;
  return v;
}

}  // namespace wgqed
