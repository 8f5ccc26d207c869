#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "wgqed/model.hpp"

namespace wgqed {
namespace {

constexpr double kPi = std::numbers::pi;

struct Grid {
  int n_qubits;
  double tau;
  double phi;
  int n_max;
};

const Grid kGrid[] = {
    {2, 0.0, 0.0, 2},     {2, 0.5, 0.0, 2},  {2, 0.5, kPi / 2, 2}, {2, 2.0, kPi, 2},
    {2, 0.1, 1.234, 3},   {4, 0.0, 0.0, 2},  {4, 0.5, kPi / 2, 2}, {1, 0.0, 0.0, 1},
    {2, 0.04, -2.0, 4},   {4, 0.5, 0.3, 1},
};

PhysicalParams params_of(const Grid& g) {
  return PhysicalParams::symmetric(g.n_qubits, g.tau, g.phi, 0.02, g.n_max);
}

/// Basis index -> per-slot values, first slot most significant.
std::vector<Index> digits(Index w, const std::vector<Index>& dims) {
  std::vector<Index> d(dims.size());
  for (Index i = dims.size(); i-- > 0;) {
    d[i] = w % dims[i];
    w /= dims[i];
  }
  return d;
}

Index compose(const std::vector<Index>& d, const std::vector<Index>& dims) {
  Index w = 0;
  for (Index i = 0; i < dims.size(); ++i) w = w * dims[i] + d[i];
  return w;
}

TEST(PhaseFromDelay, FoldsIntoHalfOpenInterval) {
  EXPECT_EQ(phase_from_delay(0.0, 0.0), 0.0);
  const double odd = phase_from_delay(kPi, 1.0);
  EXPECT_NEAR(odd, kPi, 1e-15);
  EXPECT_NEAR(std::polar(1.0, odd).real(), -1.0, 1e-15);
  const double even = phase_from_delay(2 * kPi, 1.0);
  EXPECT_NEAR(even, 0.0, 1e-15);
  EXPECT_NEAR(std::polar(1.0, even).real(), 1.0, 1e-15);
  EXPECT_NEAR(phase_from_delay(1.0, 0.5), -0.5, 1e-15);
  for (double x : {-20.0, -3.5, 0.7, 9.0, 100.0}) {
    const double p = phase_from_delay(x, 1.0);
    EXPECT_GT(p, -kPi);
    EXPECT_LE(p, kPi);
    EXPECT_NEAR(std::abs(std::polar(1.0, p) - std::polar(1.0, -x)), 0.0, 1e-12);
  }
}

TEST(DickeRate, ClosedForms) {
  EXPECT_EQ(dicke_rate(2, 2), 2.0);
  EXPECT_EQ(dicke_rate(2, 1), 2.0);
  EXPECT_EQ(dicke_rate(4, 2), 6.0);
  EXPECT_EQ(dicke_rate(4, 4), 4.0);
  EXPECT_EQ(dicke_rate(4, 1), 4.0);
  EXPECT_THROW(dicke_rate(4, 3), std::invalid_argument);
  EXPECT_THROW(dicke_rate(3, 2), std::invalid_argument);
  EXPECT_THROW(dicke_rate(0, 0), std::invalid_argument);
}

TEST(Params, Validation) {
  auto p = PhysicalParams::symmetric(2, 0.5, 0.0);
  EXPECT_EQ(p.delay_bins(), 25u);
  EXPECT_FALSE(p.markovian());
  p.tau = 0.51;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = PhysicalParams::symmetric(2, 0.0, 0.0);
  EXPECT_TRUE(p.markovian());
  p.gamma_left[0] = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = PhysicalParams::symmetric(2, 0.0, 0.0);
  p.dt = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = PhysicalParams::symmetric(2, 0.0, 0.0);
  p.gamma_right.pop_back();
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(StepGate, SingleQubitRabiBlock) {
  // Only the {|e,0>, |g,1>} block couples; one step moves sin^2(sqrt(gamma dt)).
  PhysicalParams p;
  p.n_qubits = 1;
  p.gamma_left = {1.0};
  p.gamma_right = {0.0};
  p.dt = 1e-4;
  p.n_max = 1;
  const auto g = build_step_gate(p);
  const auto dims = g.dims();
  const Matrix u = g.gate.dense();
  std::vector<Index> in(dims.size(), 0);
  in[g.slot(WindowRole::system)] = 1;
  std::vector<Index> out(dims.size(), 0);
  out[g.slot(WindowRole::current_left)] = 1;
  const double moved = std::norm(u(compose(out, dims), compose(in, dims)));
  const double expected = std::pow(std::sin(std::sqrt(1e-4)), 2);
  EXPECT_NEAR(moved, expected, 1e-12);
  EXPECT_NEAR(moved, 1e-4, 1e-8);
  std::vector<Index> right(dims.size(), 0);
  right[g.slot(WindowRole::current_right)] = 1;
  EXPECT_EQ(std::abs(u(compose(right, dims), compose(in, dims))), 0.0);
}

TEST(StepGate, UnitaryAcrossGrid) {
  for (const auto& g : kGrid) {
    const auto gate = build_step_gate(params_of(g));
    EXPECT_LT(gate.unitarity_error(), 1e-10) << g.n_qubits << " " << g.tau << " " << g.phi;
  }
}

TEST(StepGate, MatchesEigendecompositionRoute) {
  for (const auto& g : kGrid) {
    const auto p = params_of(g);
    const auto gate = build_step_gate(p);
    // Dense diagonalization is cubic; larger windows are left to the other checks.
    if (gate.gate.dimension() > 1024) continue;
    const Matrix a = gate.gate.dense();
    const Matrix b = step_gate_by_eigendecomposition(p);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12) << g.n_qubits << " " << g.tau;
  }
}

TEST(StepGate, CommutesWithExcitationNumber) {
  for (const auto& g : kGrid) {
    const auto gate = build_step_gate(params_of(g));
    const auto dims = gate.dims();
    const Matrix u = gate.gate.dense();
    Eigen::VectorXd n(u.rows());
    for (Index w = 0; w < static_cast<Index>(u.rows()); ++w) {
      const auto d = digits(w, dims);
      double count = 0.0;
      for (Index s = 0; s < dims.size(); ++s)
        count += gate.roles[s] == WindowRole::system ? popcount(d[s]) : static_cast<double>(d[s]);
      n(static_cast<Eigen::Index>(w)) = count;
    }
    const Matrix nu = n.asDiagonal() * u;
    const Matrix un = u * n.asDiagonal();
    EXPECT_LT((nu - un).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(StepGate, MirrorSymmetry) {
  // Mirror the waveguide: exchange the two emitter groups and the two
  // propagation directions. Symmetric couplings leave the gate invariant.
  for (const auto& g : kGrid) {
    if (g.n_qubits == 1) continue;
    const auto gate = build_step_gate(params_of(g));
    const auto dims = gate.dims();
    const Matrix u = gate.gate.dense();
    const int n = g.n_qubits;
    const int half = n / 2;
    auto mirror_slot = [&](WindowRole r) {
      switch (r) {
        case WindowRole::delayed_left: return gate.slot(WindowRole::delayed_right);
        case WindowRole::delayed_right: return gate.slot(WindowRole::delayed_left);
        case WindowRole::current_left: return gate.slot(WindowRole::current_right);
        case WindowRole::current_right: return gate.slot(WindowRole::current_left);
        default: return gate.slot(WindowRole::system);
      }
    };
    const Index dim = static_cast<Index>(u.rows());
    std::vector<Index> perm(dim);
    for (Index w = 0; w < dim; ++w) {
      const auto d = digits(w, dims);
      std::vector<Index> m(d.size());
      for (Index s = 0; s < d.size(); ++s) {
        Index v = d[s];
        if (gate.roles[s] == WindowRole::system) {
          Index swapped = 0;
          for (int q = 0; q < n; ++q) {
            const int target = (q + half) % n;
            if ((v >> (n - 1 - q)) & 1U) swapped |= Index{1} << (n - 1 - target);
          }
          v = swapped;
        }
        m[mirror_slot(gate.roles[s])] = v;
      }
      perm[w] = compose(m, dims);
    }
    double worst = 0.0;
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j)
        worst = std::max(worst, std::abs(u(perm[i], perm[j]) - u(i, j)));
    EXPECT_LT(worst, 1e-12) << g.n_qubits << " " << g.tau << " " << g.phi;
  }
}

TEST(StepGate, ChecksumIdentifiesGate) {
  const auto a = build_step_gate(PhysicalParams::symmetric(2, 0.5, 0.0));
  const auto b = build_step_gate(PhysicalParams::symmetric(2, 0.5, 0.0));
  const auto c = build_step_gate(PhysicalParams::symmetric(2, 0.5, 0.1));
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_NE(a.checksum(), c.checksum());
}

TEST(StepGate, WindowRoles) {
  const auto delayed = build_step_gate(PhysicalParams::symmetric(2, 0.5, 0.0));
  const std::vector<WindowRole> five{WindowRole::delayed_left, WindowRole::delayed_right,
                                     WindowRole::system, WindowRole::current_right,
                                     WindowRole::current_left};
  EXPECT_EQ(delayed.roles, five);
  EXPECT_EQ(delayed.delay_bins, 25u);
  const auto markov = build_step_gate(PhysicalParams::symmetric(2, 0.0, 0.0));
  const std::vector<WindowRole> three{WindowRole::system, WindowRole::current_right,
                                      WindowRole::current_left};
  EXPECT_EQ(markov.roles, three);
}

TEST(LocalOperators, Algebra) {
  const Matrix a = annihilation(3);
  const Matrix n = number_operator(3);
  EXPECT_LT((a.adjoint() * a - n).cwiseAbs().maxCoeff(), 1e-15);
  for (int q = 0; q < 2; ++q) {
    const Matrix sp = sigma_plus(q, 2);
    const Matrix sm = sigma_minus(q, 2);
    EXPECT_LT((sp.adjoint() - sm).cwiseAbs().maxCoeff(), 0.0 + 1e-15);
    // sigma+ sigma- is the excited projector of qubit q; index 2 is |eg>.
    const Matrix proj = sp * sm;
    EXPECT_NEAR(proj(2, 2).real(), q == 0 ? 1.0 : 0.0, 1e-15);
  }
  EXPECT_EQ(popcount(0b1011), 3);
  const auto v = vacuum(2);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], cplx(1.0));
}

}  // namespace
}  // namespace wgqed
