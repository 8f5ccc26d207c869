#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "wgqed/kernels.hpp"
#include "wgqed/model.hpp"

namespace wgqed {
namespace {

std::vector<cplx> random_tensor(Index n, std::mt19937_64& rng, double zero_fraction = 0.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  std::vector<cplx> v(n);
  for (auto& c : v) c = u(rng) < zero_fraction ? cplx{} : cplx{g(rng), g(rng)};
  return v;
}

/// Plain dense reference: out[a, i, b] = sum_j U[i, j] in[a, j, b].
std::vector<cplx> dense_reference(const Matrix& u, const std::vector<cplx>& in, Index left,
                                  Index right) {
  const Index d = static_cast<Index>(u.rows());
  std::vector<cplx> out(in.size(), 0.0);
  for (Index a = 0; a < left; ++a)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        for (Index b = 0; b < right; ++b)
          out[(a * d + i) * right + b] += u(i, j) * in[(a * d + j) * right + b];
  return out;
}

TEST(Kernels, SerialMatchesDenseReference) {
  std::mt19937_64 rng(21);
  const auto gate = build_step_gate(PhysicalParams::symmetric(2, 0.5, 0.7)).gate;
  const Index left = 5;
  const Index right = 7;
  const auto in = random_tensor(left * gate.dimension() * right, rng);
  std::vector<cplx> out(in.size());
  apply_blocked_gate_serial(gate, in, out, left, right);
  EXPECT_LT(testing::distance(out, dense_reference(gate.dense(), in, left, right)), 1e-12);
}

TEST(Kernels, ParallelMatchesSerial) {
  std::mt19937_64 rng(22);
  for (int n : {2, 4}) {
    const auto gate = build_step_gate(PhysicalParams::symmetric(n, 0.5, 1.3)).gate;
    for (double zeros : {0.0, 0.7}) {
      const Index left = 9;
      const Index right = 6;
      const auto in = random_tensor(left * gate.dimension() * right, rng, zeros);
      std::vector<cplx> a(in.size());
      std::vector<cplx> b(in.size());
      apply_blocked_gate_serial(gate, in, a, left, right);
      apply_blocked_gate_parallel(gate, in, b, left, right);
      EXPECT_LT(testing::distance(a, b), 1e-12) << n << " qubits, zero fraction " << zeros;
    }
  }
}

TEST(Kernels, ParallelIsRepeatable) {
  std::mt19937_64 rng(23);
  const auto gate = build_step_gate(PhysicalParams::symmetric(2, 0.5, 0.2)).gate;
  const auto in = random_tensor(12 * gate.dimension() * 3, rng, 0.3);
  std::vector<cplx> a(in.size());
  std::vector<cplx> b(in.size());
  apply_blocked_gate_parallel(gate, in, a, 12, 3);
  apply_blocked_gate_parallel(gate, in, b, 12, 3);
  EXPECT_EQ(a, b);
}

TEST(Kernels, BlocksCoverTheBasis) {
  const auto gate = build_step_gate(PhysicalParams::symmetric(4, 0.5, 0.0)).gate;
  std::vector<int> seen(gate.dimension(), 0);
  for (Index b = 0; b < gate.blocks().size(); ++b) {
    const auto& blk = gate.blocks()[b];
    for (Index r = 0; r < blk.indices.size(); ++r) {
      ++seen[blk.indices[r]];
      EXPECT_EQ(gate.block_of(blk.indices[r]), b);
      EXPECT_EQ(gate.row_in_block(blk.indices[r]), r);
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_GT(gate.blocks().size(), 1u);
}

TEST(Kernels, FromDenseAndIdentity) {
  std::mt19937_64 rng(24);
  const Matrix u = testing::random_unitary(6, rng);
  const auto g = BlockedGate::from_dense(u, {2, 3});
  EXPECT_LT((g.dense() - u).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(g.unitarity_error(), 1e-12);
  EXPECT_THROW(BlockedGate::from_dense(u, {2, 2}), DimensionMismatch);
  EXPECT_EQ(BlockedGate::identity({2, 3}).dense(), Matrix::Identity(6, 6));
}

TEST(Kernels, DispatchHonoursPolicy) {
  std::mt19937_64 rng(25);
  const auto gate = build_step_gate(PhysicalParams::symmetric(2, 0.0, 0.0)).gate;
  const auto in = random_tensor(4 * gate.dimension() * 4, rng);
  std::vector<cplx> serial(in.size());
  std::vector<cplx> via(in.size());
  apply_blocked_gate_serial(gate, in, serial, 4, 4);
  apply_blocked_gate(gate, in, via, 4, 4, {false, true});
  EXPECT_EQ(serial, via);
}

}  // namespace
}  // namespace wgqed
