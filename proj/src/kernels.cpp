#include "wgqed/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace wgqed {

BlockedGate::BlockedGate(std::vector<Index> site_dims, std::vector<GateBlock> blocks)
    : site_dims_(std::move(site_dims)), blocks_(std::move(blocks)) {
  dimension_ = std::accumulate(site_dims_.begin(), site_dims_.end(), Index{1},
                               std::multiplies<>());
  const Index unset = dimension_;
  block_of_.assign(dimension_, unset);
  row_in_block_.assign(dimension_, 0);
  for (Index b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    if (static_cast<Index>(blk.matrix.rows()) != blk.indices.size() ||
        static_cast<Index>(blk.matrix.cols()) != blk.indices.size()) {
      throw DimensionMismatch("gate block matrix does not match its index list");
    }
    for (Index r = 0; r < blk.indices.size(); ++r) {
      const Index w = blk.indices[r];
      if (w >= dimension_) throw DimensionMismatch("gate block index out of range");
      if (block_of_[w] != unset) throw DimensionMismatch("gate blocks overlap");
      block_of_[w] = b;
      row_in_block_[w] = r;
    }
  }
  if (std::find(block_of_.begin(), block_of_.end(), unset) != block_of_.end()) {
    throw DimensionMismatch("gate blocks do not cover the window basis");
  }
}

BlockedGate BlockedGate::from_dense(const Matrix& u, std::vector<Index> site_dims) {
  const Index dim = std::accumulate(site_dims.begin(), site_dims.end(), Index{1},
                                    std::multiplies<>());
  if (static_cast<Index>(u.rows()) != dim || static_cast<Index>(u.cols()) != dim) {
    throw DimensionMismatch("gate dimension does not equal the product of site dimensions");
  }
  GateBlock blk;
  blk.indices.resize(dim);
  std::iota(blk.indices.begin(), blk.indices.end(), Index{0});
  blk.matrix = u;
  return BlockedGate(std::move(site_dims), {std::move(blk)});
}

BlockedGate BlockedGate::identity(std::vector<Index> site_dims) {
  const Index dim = std::accumulate(site_dims.begin(), site_dims.end(), Index{1},
                                    std::multiplies<>());
  std::vector<GateBlock> blocks(dim);
  for (Index w = 0; w < dim; ++w) {
    blocks[w].indices = {w};
    blocks[w].matrix = Matrix::Identity(1, 1);
  }
  return BlockedGate(std::move(site_dims), std::move(blocks));
}

Matrix BlockedGate::dense() const {
  Matrix u = Matrix::Zero(dimension_, dimension_);
  for (const auto& blk : blocks_) {
    for (Index r = 0; r < blk.indices.size(); ++r) {
      for (Index c = 0; c < blk.indices.size(); ++c) {
        u(blk.indices[r], blk.indices[c]) = blk.matrix(r, c);
      }
    }
  }
  return u;
}

double BlockedGate::unitarity_error() const {
  double worst = 0.0;
  for (const auto& blk : blocks_) {
    const Index n = blk.indices.size();
    const Matrix defect = blk.matrix.adjoint() * blk.matrix - Matrix::Identity(n, n);
    worst = std::max(worst, defect.cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

void check_extents(const BlockedGate& gate, std::span<const cplx> in, std::span<cplx> out,
                   Index left, Index right) {
  const Index expected = left * gate.dimension() * right;
  if (in.size() != expected || out.size() != expected) {
    throw DimensionMismatch("tensor size does not match gate dimension and bonds");
  }
}

}  // namespace

void apply_blocked_gate_serial(const BlockedGate& gate, std::span<const cplx> in,
                               std::span<cplx> out, Index left, Index right) {
  check_extents(gate, in, out, left, right);
  const Index dim = gate.dimension();
  for (Index a = 0; a < left; ++a) {
    for (const auto& blk : gate.blocks()) {
      const Index m = blk.indices.size();
      for (Index r = 0; r < m; ++r) {
        cplx* dst = &out[(a * dim + blk.indices[r]) * right];
        for (Index b = 0; b < right; ++b) dst[b] = 0.0;
        for (Index c = 0; c < m; ++c) {
          const cplx coeff = blk.matrix(r, c);
          if (coeff == cplx{}) continue;
          const cplx* src = &in[(a * dim + blk.indices[c]) * right];
          for (Index b = 0; b < right; ++b) dst[b] += coeff * src[b];
        }
      }
    }
  }
}

void apply_blocked_gate_parallel(const BlockedGate& gate, std::span<const cplx> in,
                                 std::span<cplx> out, Index left, Index right) {
  check_extents(gate, in, out, left, right);
  const Index dim = gate.dimension();
  const auto& blocks = gate.blocks();
  const long tasks = static_cast<long>(left * blocks.size());

#pragma omp parallel for schedule(static)
  for (long task = 0; task < tasks; ++task) {
    const Index a = static_cast<Index>(task) / blocks.size();
    const auto& blk = blocks[static_cast<Index>(task) % blocks.size()];
    const Index m = blk.indices.size();
    RowMatrix gathered(m, right);
    bool any = false;
    for (Index r = 0; r < m; ++r) {
      const cplx* src = &in[(a * dim + blk.indices[r]) * right];
      std::copy(src, src + right, gathered.row(r).data());
      any = any || std::any_of(src, src + right, [](const cplx& v) { return v != cplx{}; });
    }
    if (!any) {
      for (Index r = 0; r < m; ++r) {
        std::fill_n(&out[(a * dim + blk.indices[r]) * right], right, cplx{});
      }
      continue;
    }
    const RowMatrix result = blk.matrix * gathered;
    for (Index r = 0; r < m; ++r) {
      cplx* dst = &out[(a * dim + blk.indices[r]) * right];
      std::copy(result.row(r).data(), result.row(r).data() + right, dst);
    }
  }
}

void apply_blocked_gate(const BlockedGate& gate, std::span<const cplx> in,
                        std::span<cplx> out, Index left, Index right,
                        const ExecutionPolicy& policy) {
  if (policy.parallel) {
    apply_blocked_gate_parallel(gate, in, out, left, right);
  } else {
    apply_blocked_gate_serial(gate, in, out, left, right);
  }
}

}  // namespace wgqed
