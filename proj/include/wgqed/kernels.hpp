#pragma once

#include <span>
#include <vector>

#include "wgqed/types.hpp"

namespace wgqed {

/// One dense block of a block-diagonal operator: `matrix` acts on the
/// listed basis indices and leaves the others alone.
struct GateBlock {
  std::vector<Index> indices;
  Matrix matrix;
};

/// Unitary on a multi-site window, stored as disjoint dense blocks.
///
/// The step gate conserves the total excitation number, so grouping the
/// window basis by excitation count gives a block-diagonal operator whose
/// application costs a fraction of a dense matrix-vector product.
class BlockedGate {
 public:
  BlockedGate() = default;
  BlockedGate(std::vector<Index> site_dims, std::vector<GateBlock> blocks);

  static BlockedGate from_dense(const Matrix& u, std::vector<Index> site_dims);
  static BlockedGate identity(std::vector<Index> site_dims);

  Index dimension() const { return dimension_; }
  std::span<const Index> site_dims() const { return site_dims_; }
  const std::vector<GateBlock>& blocks() const { return blocks_; }

  /// Block containing window index `w` and its row inside that block.
  Index block_of(Index w) const { return block_of_[w]; }
  Index row_in_block(Index w) const { return row_in_block_[w]; }

  Matrix dense() const;
  double unitarity_error() const;

  /// Mutable access for tests that need to corrupt a gate on purpose.
  GateBlock& block(Index b) { return blocks_.at(b); }

 private:
  std::vector<Index> site_dims_;
  Index dimension_ = 0;
  std::vector<GateBlock> blocks_;
  std::vector<Index> block_of_;
  std::vector<Index> row_in_block_;
};

// Apply `gate` to the middle index of a (left, D, right) row-major tensor.
// The serial version is a plain loop nest kept as the reference; the
// parallel version batches each block into a GEMM and splits the work over
// (left index, block) pairs with OpenMP. Each output element is produced by
// exactly one task, so the parallel result does not depend on thread count.
void apply_blocked_gate_serial(const BlockedGate& gate, std::span<const cplx> in,
                               std::span<cplx> out, Index left, Index right);
void apply_blocked_gate_parallel(const BlockedGate& gate, std::span<const cplx> in,
                                 std::span<cplx> out, Index left, Index right);
void apply_blocked_gate(const BlockedGate& gate, std::span<const cplx> in,
                        std::span<cplx> out, Index left, Index right,
                        const ExecutionPolicy& policy);

}  // namespace wgqed
