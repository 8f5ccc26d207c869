#include "wgqed/mps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include <lapacke.h>

namespace wgqed {

std::string to_string(Direction d) { return d == Direction::left ? "L" : "R"; }

std::string to_string(const SiteLabel& label) {
  if (label.is_system()) return "sys";
  return "bin(" + to_string(label.direction) + "," + std::to_string(label.time) + ")";
}

// ---------------------------------------------------------------- SiteTensor

SiteTensor::SiteTensor(Index left, Index phys, Index right)
    : left_(left), phys_(phys), right_(right), data_(left * phys * right) {
  if (left == 0 || phys == 0 || right == 0) {
    throw DimensionMismatch("site tensor dimensions must be positive");
  }
}

SiteTensor SiteTensor::product(std::span<const cplx> local) {
  SiteTensor t(1, local.size(), 1);
  std::copy(local.begin(), local.end(), t.data_.begin());
  return t;
}

double SiteTensor::left_canonical_error() const {
  const auto m = left_matrix();
  const Matrix gram = m.adjoint() * m;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double SiteTensor::right_canonical_error() const {
  const auto m = right_matrix();
  const Matrix gram = m * m.adjoint();
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------- policy/spectrum

void TruncationPolicy::validate() const {
  if (max_bond < 1) throw std::invalid_argument("max_bond must be at least 1");
  if (!(svd_cutoff >= 0.0 && svd_cutoff < 1.0)) {
    throw std::invalid_argument("svd_cutoff must lie in [0, 1)");
  }
}

double SchmidtSpectrum::weight() const {
  double w = 0.0;
  for (double v : values) w += v * v;
  return w;
}

double SchmidtSpectrum::entropy_bits() const {
  double s = 0.0;
  for (double v : values) {
    const double p = v * v;
    if (p > 0.0) s -= p * std::log2(p);
  }
  return s;
}

TruncationDecision decide_truncation(std::span<const double> singular_values,
                                     const TruncationPolicy& policy) {
  if (singular_values.empty()) return {0, 0.0};
  const double largest = singular_values.front();
  Index keep = 1;
  if (largest > 0.0) {
    const double threshold = policy.svd_cutoff * largest;
    keep = 0;
    while (keep < singular_values.size() && singular_values[keep] > threshold) ++keep;
    keep = std::max<Index>(keep, 1);
  }
  if (keep > policy.max_bond) {
    if (policy.forbid_truncation) {
      throw BondOverflow("bond dimension " + std::to_string(keep) + " exceeds max_bond " +
                         std::to_string(policy.max_bond));
    }
    keep = policy.max_bond;
  }
  double discarded = 0.0;
  for (Index i = keep; i < singular_values.size(); ++i) {
    discarded += singular_values[i] * singular_values[i];
  }
  return {keep, discarded};
}

// ------------------------------------------------------------------ MpsChain

namespace {

struct Block {
  std::vector<Index> rows;
  std::vector<Index> cols;
};

// Connected components of the bipartite graph linking row r and column c
// whenever m(r, c) != 0. Excitation-number conservation keeps the forbidden
// entries exactly zero, so the components are the charge sectors of the
// matrix. Components are ordered by their smallest row.
std::vector<Block> nonzero_blocks(const Matrix& m) {
  const auto rows = static_cast<Index>(m.rows());
  const auto cols = static_cast<Index>(m.cols());
  std::vector<Index> parent(rows + cols);
  std::iota(parent.begin(), parent.end(), Index{0});
  const auto find = [&parent](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> used_row(rows, 0);
  std::vector<char> used_col(cols, 0);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      if (m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) == cplx{}) continue;
      used_row[r] = used_col[c] = 1;
      const Index a = find(r);
      const Index b = find(rows + c);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<Block> blocks;
  std::vector<Index> slot(rows + cols, rows + cols);
  for (Index r = 0; r < rows; ++r) {
    if (!used_row[r]) continue;
    const Index root = find(r);
    if (slot[root] == rows + cols) {
      slot[root] = blocks.size();
      blocks.emplace_back();
    }
    blocks[slot[root]].rows.push_back(r);
  }
  for (Index c = 0; c < cols; ++c) {
    if (used_col[c]) blocks[slot[find(rows + c)]].cols.push_back(c);
  }
  return blocks;
}

Matrix gather(const Matrix& m, const Block& b) {
  Matrix sub(b.rows.size(), b.cols.size());
  for (Index j = 0; j < b.cols.size(); ++j) {
    for (Index i = 0; i < b.rows.size(); ++i) {
      sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(b.rows[i]), static_cast<Eigen::Index>(b.cols[j]));
    }
  }
  return sub;
}

struct ThinSvd {
  std::vector<double> values;  // descending
  Matrix u;                    // rows x k
  Matrix v;                    // cols x k
};

struct DenseSvd {
  RealVector values;  // descending
  Matrix u;           // rows x k
  Matrix v;           // cols x k
};

}  // namespace

// Present when LAPACK comes from OpenBLAS, whose own threads would make
// results depend on the thread count.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace {

// Divide-and-conquer SVD from LAPACK.
DenseSvd dense_svd(Matrix a) {
  static const bool single_threaded = [] {
    if (openblas_set_num_threads != nullptr) openblas_set_num_threads(1);
    return true;
  }();
  (void)single_threaded;
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  DenseSvd out;
  out.values.resize(k);
  out.u.resize(m, k);
  Matrix vt(k, n);
  const auto z = [](Matrix& x) { return reinterpret_cast<lapack_complex_double*>(x.data()); };
  const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, z(a), m, out.values.data(),
                                         z(out.u), m, z(vt), k);
  if (info != 0) throw std::runtime_error("zgesdd failed with info " + std::to_string(info));
  out.v = vt.adjoint();
  return out;
}

// Thin SVD assembled from the SVDs of the nonzero blocks. Equal singular
// values keep the order in which their blocks were found.
ThinSvd block_svd(const Matrix& m) {
  const auto blocks = nonzero_blocks(m);
  struct Triplet {
    double value;
    Index block;
    Index index;
  };
  std::vector<Triplet> order;
  std::vector<DenseSvd> svds;
  svds.reserve(blocks.size());
  for (Index b = 0; b < blocks.size(); ++b) {
    svds.push_back(dense_svd(gather(m, blocks[b])));
    const RealVector& sv = svds.back().values;
    for (Eigen::Index j = 0; j < sv.size(); ++j) order.push_back({sv(j), b, static_cast<Index>(j)});
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Triplet& x, const Triplet& y) { return x.value > y.value; });

  ThinSvd out;
  if (order.empty()) {
    out.values = {0.0};
    out.u = Matrix::Identity(m.rows(), 1);
    out.v = Matrix::Identity(m.cols(), 1);
    return out;
  }
  const auto k = static_cast<Eigen::Index>(order.size());
  out.u = Matrix::Zero(m.rows(), k);
  out.v = Matrix::Zero(m.cols(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& t = order[static_cast<Index>(j)];
    out.values.push_back(t.value);
    const auto& blk = blocks[t.block];
    const Matrix& u = svds[t.block].u;
    const Matrix& v = svds[t.block].v;
    const auto col = static_cast<Eigen::Index>(t.index);
    for (Index i = 0; i < blk.rows.size(); ++i) {
      out.u(static_cast<Eigen::Index>(blk.rows[i]), j) = u(static_cast<Eigen::Index>(i), col);
    }
    for (Index i = 0; i < blk.cols.size(); ++i) {
      out.v(static_cast<Eigen::Index>(blk.cols[i]), j) = v(static_cast<Eigen::Index>(i), col);
    }
  }
  return out;
}

struct ThinQr {
  Matrix q;  // rows x k, orthonormal columns
  Matrix r;  // k x cols
};

// m = q r with q built block by block, so q keeps the sparsity of m.
ThinQr block_qr(const Matrix& m) {
  const auto blocks = nonzero_blocks(m);
  Index k = 0;
  for (const auto& b : blocks) k += std::min(b.rows.size(), b.cols.size());
  ThinQr out;
  if (k == 0) {
    out.q = Matrix::Identity(m.rows(), 1);
    out.r = Matrix::Zero(1, m.cols());
    return out;
  }
  out.q = Matrix::Zero(m.rows(), static_cast<Eigen::Index>(k));
  out.r = Matrix::Zero(static_cast<Eigen::Index>(k), m.cols());
  Index offset = 0;
  for (const auto& b : blocks) {
    const Matrix sub = gather(m, b);
    const auto rows = sub.rows();
    const auto kb = std::min(sub.rows(), sub.cols());
    Eigen::HouseholderQR<Matrix> qr(sub);
    const Matrix q = qr.householderQ() * Matrix::Identity(rows, kb);
    const Matrix r = qr.matrixQR().topRows(kb).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < kb; ++j) {
      const auto col = static_cast<Eigen::Index>(offset) + j;
      for (Index i = 0; i < b.rows.size(); ++i) {
        out.q(static_cast<Eigen::Index>(b.rows[i]), col) = q(static_cast<Eigen::Index>(i), j);
      }
      for (Index i = 0; i < b.cols.size(); ++i) {
        out.r(col, static_cast<Eigen::Index>(b.cols[i])) = r(j, static_cast<Eigen::Index>(i));
      }
    }
    offset += static_cast<Index>(kb);
  }
  return out;
}

}  // namespace

MpsChain::MpsChain(std::vector<SiteTensor> sites, std::vector<SiteLabel> labels)
    : sites_(std::move(sites)), labels_(std::move(labels)) {
  if (sites_.empty()) throw std::invalid_argument("chain needs at least one site");
  if (sites_.size() != labels_.size()) {
    throw std::invalid_argument("one label per site is required");
  }
  if (sites_.front().left_dim() != 1 || sites_.back().right_dim() != 1) {
    throw DimensionMismatch("open boundary bonds must have dimension 1");
  }
  for (Index i = 0; i + 1 < sites_.size(); ++i) {
    if (sites_[i].right_dim() != sites_[i + 1].left_dim()) {
      throw DimensionMismatch("bond dimensions of sites " + std::to_string(i) + " and " +
                              std::to_string(i + 1) + " differ");
    }
  }
  lo_ = 0;
  hi_ = sites_.size() - 1;
}

MpsChain MpsChain::product(const std::vector<std::vector<cplx>>& locals,
                           std::vector<SiteLabel> labels) {
  std::vector<SiteTensor> sites;
  sites.reserve(locals.size());
  bool normalized = true;
  for (const auto& v : locals) {
    double n2 = 0.0;
    for (const auto& c : v) n2 += std::norm(c);
    normalized = normalized && std::abs(n2 - 1.0) < 1e-13;
    sites.push_back(SiteTensor::product(v));
  }
  MpsChain chain(std::move(sites), std::move(labels));
  if (normalized) {
    chain.lo_ = 0;
    chain.hi_ = 0;
  }
  return chain;
}

std::optional<Index> MpsChain::position_of(const SiteLabel& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<Index>(it - labels_.begin());
}

std::optional<Index> MpsChain::center() const {
  if (lo_ == hi_) return lo_;
  return std::nullopt;
}

Index MpsChain::max_bond_dimension() const {
  Index m = 1;
  for (const auto& s : sites_) m = std::max(m, s.right_dim());
  return m;
}

std::vector<Index> MpsChain::bond_dimensions() const {
  std::vector<Index> dims;
  for (Index i = 0; i + 1 < sites_.size(); ++i) dims.push_back(sites_[i].right_dim());
  return dims;
}

void MpsChain::left_orthonormalize(Index i) {
  SiteTensor& a = sites_[i];
  const auto qr = block_qr(a.left_matrix());
  const Index k = static_cast<Index>(qr.q.cols());

  SiteTensor next_a(a.left_dim(), a.phys_dim(), k);
  next_a.left_matrix() = qr.q;
  SiteTensor& b = sites_[i + 1];
  SiteTensor next_b(k, b.phys_dim(), b.right_dim());
  next_b.right_matrix() = qr.r * b.right_matrix();
  a = std::move(next_a);
  b = std::move(next_b);
}

void MpsChain::right_orthonormalize(Index i) {
  SiteTensor& a = sites_[i];
  const auto qr = block_qr(a.right_matrix().adjoint());
  const Index k = static_cast<Index>(qr.q.cols());

  SiteTensor next_a(k, a.phys_dim(), a.right_dim());
  next_a.right_matrix() = qr.q.adjoint();
  SiteTensor& b = sites_[i - 1];
  SiteTensor next_b(b.left_dim(), b.phys_dim(), k);
  next_b.left_matrix() = b.left_matrix() * qr.r.adjoint();
  a = std::move(next_a);
  b = std::move(next_b);
}

void MpsChain::canonicalize(Index target) {
  if (target >= sites_.size()) {
    throw std::out_of_range("canonicalize target " + std::to_string(target) +
                            " outside chain of " + std::to_string(sites_.size()));
  }
  for (Index i = lo_; i < target; ++i) left_orthonormalize(i);
  for (Index i = hi_; i > target; --i) right_orthonormalize(i);
  lo_ = target;
  hi_ = target;
}

void MpsChain::focus(Index first, Index last) {
  for (Index i = lo_; i < first; ++i) left_orthonormalize(i);
  for (Index i = hi_; i > last; --i) right_orthonormalize(i);
  lo_ = std::max(lo_, first);
  hi_ = std::min(hi_, last);
  if (lo_ > hi_) lo_ = hi_ = (lo_ > last ? last : first);
}

MpsChain::Window MpsChain::contract_window(Index first, Index count) const {
  Window w;
  w.left = sites_[first].left_dim();
  RowMatrix acc = sites_[first].left_matrix();
  w.dims.push_back(sites_[first].phys_dim());
  for (Index i = first + 1; i < first + count; ++i) {
    const Index bond = sites_[i].left_dim();
    const Index rows = static_cast<Index>(acc.size()) / bond;
    const Eigen::Map<const RowMatrix> view(acc.data(), rows, bond);
    // Conserved excitation number leaves most rows exactly zero; multiply
    // only the others.
    std::vector<Eigen::Index> live;
    for (Index r = 0; r < rows; ++r) {
      if (!view.row(static_cast<Eigen::Index>(r)).isZero(0.0)) live.push_back(static_cast<Eigen::Index>(r));
    }
    const auto rhs = sites_[i].right_matrix();
    RowMatrix next = RowMatrix::Zero(static_cast<Eigen::Index>(rows), rhs.cols());
    if (!live.empty()) {
      const RowMatrix packed = view(live, Eigen::all);
      const RowMatrix product = packed * rhs;
      next(live, Eigen::all) = product;
    }
    acc = std::move(next);
    w.dims.push_back(sites_[i].phys_dim());
  }
  w.right = sites_[first + count - 1].right_dim();
  w.theta.assign(acc.data(), acc.data() + acc.size());
  return w;
}

double MpsChain::split_window(Window window, Index first, const TruncationPolicy& policy,
                              bool center_left) {
  const Index count = window.dims.size();
  Index cur_left = window.left;
  Index rest = window.theta.size() / cur_left;
  RowMatrix remainder =
      Eigen::Map<const RowMatrix>(window.theta.data(), cur_left, rest);
  double discarded = 0.0;

  for (Index i = 0; i + 1 < count; ++i) {
    const Index d = window.dims[i];
    const Index rows = cur_left * d;
    const Index cols = remainder.size() / rows;
    const Matrix m = Eigen::Map<const RowMatrix>(remainder.data(), rows, cols);
    const ThinSvd svd = block_svd(m);
    const auto decision = decide_truncation(svd.values, policy);
    discarded += decision.discarded;
    const Index keep = decision.keep;
    const auto kept = static_cast<Eigen::Index>(keep);

    const Eigen::Map<const RealVector> sv(svd.values.data(), kept);
    SiteTensor site(cur_left, d, keep);
    if (center_left && i + 2 == count) {
      site.left_matrix() = svd.u.leftCols(kept) * sv.cast<cplx>().asDiagonal();
      remainder = svd.v.leftCols(kept).adjoint();
    } else {
      site.left_matrix() = svd.u.leftCols(kept);
      remainder = sv.cast<cplx>().asDiagonal() * svd.v.leftCols(kept).adjoint();
    }
    sites_[first + i] = std::move(site);
    cur_left = keep;
  }
  SiteTensor last(cur_left, window.dims.back(), window.right);
  last.right_matrix() = Eigen::Map<const RowMatrix>(
      remainder.data(), cur_left, window.dims.back() * window.right);
  sites_[first + count - 1] = std::move(last);

  lo_ = first + count - ((center_left && count > 1) ? 2 : 1);
  hi_ = lo_;
  truncation_weight_ += discarded;
  return discarded;
}

double MpsChain::apply_gate(const BlockedGate& gate, Index first, const TruncationPolicy& policy,
                            const ExecutionPolicy& exec, std::span<const Index> output_order) {
  const auto dims = gate.site_dims();
  const Index count = dims.size();
  if (count == 0 || first + count > sites_.size()) {
    throw std::out_of_range("gate window exceeds the chain");
  }
  for (Index j = 0; j < count; ++j) {
    if (sites_[first + j].phys_dim() != dims[j]) {
      throw DimensionMismatch("gate dimension does not match physical dimension of site " +
                              std::to_string(first + j));
    }
  }
  if (!output_order.empty()) {
    if (output_order.size() != count) {
      throw std::invalid_argument("output order must list every window site once");
    }
    std::vector<Index> sorted(output_order.begin(), output_order.end());
    std::sort(sorted.begin(), sorted.end());
    for (Index j = 0; j < count; ++j) {
      if (sorted[j] != j) throw std::invalid_argument("output order is not a permutation");
    }
  }

  focus(first, first + count - 1);
  Window w = contract_window(first, count);
  std::vector<cplx> evolved(w.theta.size());
  apply_blocked_gate(gate, w.theta, evolved, w.left, w.right, exec);

  if (!output_order.empty()) {
    const Index dim = gate.dimension();
    std::vector<Index> new_dims(count);
    for (Index j = 0; j < count; ++j) new_dims[j] = dims[output_order[j]];

    // Map each input window index to its permuted position.
    std::vector<Index> target(dim);
    std::vector<Index> digits(count);
    for (Index in = 0; in < dim; ++in) {
      Index rem = in;
      for (Index j = count; j-- > 0;) {
        digits[j] = rem % dims[j];
        rem /= dims[j];
      }
      Index out = 0;
      for (Index j = 0; j < count; ++j) out = out * new_dims[j] + digits[output_order[j]];
      target[in] = out;
    }
    std::vector<cplx> permuted(evolved.size());
    for (Index a = 0; a < w.left; ++a) {
      for (Index in = 0; in < dim; ++in) {
        const cplx* src = &evolved[(a * dim + in) * w.right];
        std::copy(src, src + w.right, &permuted[(a * dim + target[in]) * w.right]);
      }
    }
    evolved = std::move(permuted);
    w.dims = new_dims;

    std::vector<SiteLabel> old_labels(labels_.begin() + first, labels_.begin() + first + count);
    for (Index j = 0; j < count; ++j) labels_[first + j] = old_labels[output_order[j]];
  }
  w.theta = std::move(evolved);
  return split_window(std::move(w), first, policy);
}

double MpsChain::swap_adjacent(Index i, const TruncationPolicy& policy, bool center_right) {
  if (i + 1 >= sites_.size()) {
    throw std::out_of_range("swap index " + std::to_string(i) + " has no right neighbour");
  }
  focus(i, i + 1);
  Window w = contract_window(i, 2);
  const Index d0 = w.dims[0];
  const Index d1 = w.dims[1];
  std::vector<cplx> swapped(w.theta.size());
  for (Index a = 0; a < w.left; ++a) {
    for (Index s0 = 0; s0 < d0; ++s0) {
      for (Index s1 = 0; s1 < d1; ++s1) {
        const cplx* src = &w.theta[((a * d0 + s0) * d1 + s1) * w.right];
        std::copy(src, src + w.right, &swapped[((a * d1 + s1) * d0 + s0) * w.right]);
      }
    }
  }
  w.theta = std::move(swapped);
  w.dims = {d1, d0};
  std::swap(labels_[i], labels_[i + 1]);
  return split_window(std::move(w), i, policy, !center_right);
}

SchmidtSpectrum MpsChain::schmidt_at_bond(Index bond) {
  if (bond + 1 >= sites_.size()) {
    throw std::out_of_range("bond " + std::to_string(bond) + " out of range");
  }
  canonicalize(bond);
  return {block_svd(sites_[bond].left_matrix()).values};
}

namespace {

using StridedSlice = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

// Slice A[:, s, :] of a site tensor as a left x right matrix.
StridedSlice physical_slice(const SiteTensor& t, Index s) {
  return {t.data().data() + s * t.right_dim(), static_cast<Eigen::Index>(t.left_dim()),
          static_cast<Eigen::Index>(t.right_dim()),
          Eigen::OuterStride<>(static_cast<Eigen::Index>(t.phys_dim() * t.right_dim()))};
}

}  // namespace

// env[a, a'] carries bra index a and ket index a'; returns the same object one
// bond further right: sum_{s,s'} O[s,s'] A_s^dagger env A_{s'}.
Matrix MpsChain::left_environment_step(const Matrix& env, Index site, const Matrix* op) const {
  const SiteTensor& t = sites_[site];
  const Index d = t.phys_dim();
  Matrix next = Matrix::Zero(t.right_dim(), t.right_dim());
  if (op == nullptr) {
    for (Index s = 0; s < d; ++s) {
      const auto a = physical_slice(t, s);
      next.noalias() += a.adjoint() * (env * a);
    }
    return next;
  }
  std::vector<Matrix> kets(d);
  for (Index s = 0; s < d; ++s) kets[s] = env * physical_slice(t, s);
  for (Index s = 0; s < d; ++s) {
    Matrix mixed = Matrix::Zero(t.left_dim(), t.right_dim());
    for (Index sp = 0; sp < d; ++sp) {
      const cplx o = (*op)(s, sp);
      if (o != cplx{}) mixed += o * kets[sp];
    }
    next.noalias() += physical_slice(t, s).adjoint() * mixed;
  }
  return next;
}

cplx MpsChain::expect_local(std::span<const LocalOperator> ops) const {
  std::vector<const LocalOperator*> sorted;
  for (const auto& o : ops) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* x, const auto* y) { return x->site < y->site; });
  for (Index j = 0; j < sorted.size(); ++j) {
    const auto& o = *sorted[j];
    if (o.site >= sites_.size()) throw std::out_of_range("operator site out of range");
    if (j > 0 && sorted[j - 1]->site == o.site) {
      throw std::invalid_argument("operators must act on distinct sites");
    }
    const Index d = sites_[o.site].phys_dim();
    if (static_cast<Index>(o.op.rows()) != d || static_cast<Index>(o.op.cols()) != d) {
      throw DimensionMismatch("operator on site " + std::to_string(o.site) +
                              " does not match physical dimension");
    }
  }
  Index lo = lo_;
  Index hi = hi_;
  if (!sorted.empty()) {
    lo = std::min(lo, sorted.front()->site);
    hi = std::max(hi, sorted.back()->site);
  }
  Matrix env = Matrix::Identity(sites_[lo].left_dim(), sites_[lo].left_dim());
  Index next_op = 0;
  for (Index i = lo; i <= hi; ++i) {
    const Matrix* op = nullptr;
    if (next_op < sorted.size() && sorted[next_op]->site == i) op = &sorted[next_op++]->op;
    env = left_environment_step(env, i, op);
  }
  return env.trace();
}

std::vector<Matrix> MpsChain::reduced_densities(Index first, Index last) const {
  if (first > last || last >= sites_.size()) {
    throw std::out_of_range("reduced density range out of bounds");
  }
  const Index lo = std::min(lo_, first);
  const Index hi = std::max(hi_, last);

  // Left environments at the left bond of each site in [first, last].
  std::vector<Matrix> left_env(last - first + 1);
  Matrix env = Matrix::Identity(sites_[lo].left_dim(), sites_[lo].left_dim());
  for (Index i = lo; i <= last; ++i) {
    if (i >= first) left_env[i - first] = env;
    if (i < last) env = left_environment_step(env, i, nullptr);
  }

  // Right environments F[b, b'] (bra, ket) at the right bond of each site.
  std::vector<Matrix> right_env(last - first + 1);
  Matrix renv = Matrix::Identity(sites_[hi].right_dim(), sites_[hi].right_dim());
  for (Index i = hi + 1; i-- > first;) {
    if (i <= last) right_env[i - first] = renv;
    if (i == first) break;
    const SiteTensor& t = sites_[i];
    Matrix next = Matrix::Zero(t.left_dim(), t.left_dim());
    for (Index s = 0; s < t.phys_dim(); ++s) {
      const auto a = physical_slice(t, s);
      next.noalias() += a.conjugate() * renv * a.transpose();
    }
    renv = std::move(next);
  }

  std::vector<Matrix> out;
  out.reserve(last - first + 1);
  for (Index i = first; i <= last; ++i) {
    const SiteTensor& t = sites_[i];
    const Index d = t.phys_dim();
    const Matrix& e = left_env[i - first];
    const Matrix ft = right_env[i - first].transpose();
    Matrix rho(d, d);
    for (Index sp = 0; sp < d; ++sp) {
      const Matrix k = e * physical_slice(t, sp) * ft;
      for (Index s = 0; s < d; ++s) {
        rho(sp, s) = physical_slice(t, s).conjugate().cwiseProduct(k).sum();
      }
    }
    out.push_back(std::move(rho));
  }
  return out;
}

void MpsChain::insert_product_site(Index position, std::span<const cplx> local,
                                   SiteLabel label) {
  if (position > sites_.size()) throw std::out_of_range("insert position out of range");
  double n2 = 0.0;
  for (const auto& c : local) n2 += std::norm(c);
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw std::invalid_argument("inserted local state must be normalized");
  }
  const Index chi =
      position < sites_.size() ? sites_[position].left_dim() : sites_.back().right_dim();
  SiteTensor t(chi, local.size(), chi);
  for (Index a = 0; a < chi; ++a) {
    for (Index s = 0; s < local.size(); ++s) t(a, s, a) = local[s];
  }
  sites_.insert(sites_.begin() + static_cast<std::ptrdiff_t>(position), std::move(t));
  labels_.insert(labels_.begin() + static_cast<std::ptrdiff_t>(position), label);
  if (position <= lo_) {
    ++lo_;
    ++hi_;
  } else if (position <= hi_) {
    ++hi_;
  }
}

double MpsChain::norm_squared() const {
  Matrix env = Matrix::Identity(1, 1);
  for (Index i = 0; i < sites_.size(); ++i) env = left_environment_step(env, i, nullptr);
  return env.trace().real();
}

std::vector<cplx> MpsChain::to_dense() const {
  RowMatrix acc = sites_.front().left_matrix();
  for (Index i = 1; i < sites_.size(); ++i) {
    const Index rows = static_cast<Index>(acc.size()) / sites_[i].left_dim();
    const Eigen::Map<const RowMatrix> view(acc.data(), rows, sites_[i].left_dim());
    const RowMatrix next = view * sites_[i].right_matrix();
    acc = next;
  }
  return {acc.data(), acc.data() + acc.size()};
}

}  // namespace wgqed
