#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wgqed/kernels.hpp"
#include "wgqed/types.hpp"

namespace wgqed {

enum class Direction { left, right };

std::string to_string(Direction d);

/// Role of a chain site: the (co-located) qubit register or one time bin.
struct SiteLabel {
  enum class Kind { system, bin };

  Kind kind = Kind::bin;
  Direction direction = Direction::left;
  long time = 0;

  static SiteLabel system() { return {Kind::system, Direction::left, 0}; }
  static SiteLabel bin(Direction d, long k) { return {Kind::bin, d, k}; }

  bool is_system() const { return kind == Kind::system; }
  bool operator==(const SiteLabel&) const = default;
};

std::string to_string(const SiteLabel& label);

/// Rank-3 tensor A[left, phys, right], stored row-major.
class SiteTensor {
 public:
  SiteTensor() = default;
  SiteTensor(Index left, Index phys, Index right);

  /// Bond-dimension-1 tensor holding a local state vector.
  static SiteTensor product(std::span<const cplx> local);

  Index left_dim() const { return left_; }
  Index phys_dim() const { return phys_; }
  Index right_dim() const { return right_; }

  cplx& operator()(Index a, Index s, Index b) { return data_[(a * phys_ + s) * right_ + b]; }
  const cplx& operator()(Index a, Index s, Index b) const {
    return data_[(a * phys_ + s) * right_ + b];
  }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  /// (left*phys) x right view.
  Eigen::Map<RowMatrix> left_matrix() { return {data_.data(), rows_l(), cols_l()}; }
  Eigen::Map<const RowMatrix> left_matrix() const { return {data_.data(), rows_l(), cols_l()}; }
  /// left x (phys*right) view.
  Eigen::Map<RowMatrix> right_matrix() { return {data_.data(), rows_r(), cols_r()}; }
  Eigen::Map<const RowMatrix> right_matrix() const { return {data_.data(), rows_r(), cols_r()}; }

  /// Max deviation of sum_{a,s} conj(A[a,s,b]) A[a,s,b'] from the identity.
  double left_canonical_error() const;
  /// Max deviation of sum_{s,b} A[a,s,b] conj(A[a',s,b]) from the identity.
  double right_canonical_error() const;

 private:
  Eigen::Index rows_l() const { return static_cast<Eigen::Index>(left_ * phys_); }
  Eigen::Index cols_l() const { return static_cast<Eigen::Index>(right_); }
  Eigen::Index rows_r() const { return static_cast<Eigen::Index>(left_); }
  Eigen::Index cols_r() const { return static_cast<Eigen::Index>(phys_ * right_); }

  Index left_ = 1;
  Index phys_ = 1;
  Index right_ = 1;
  std::vector<cplx> data_;
};

struct TruncationPolicy {
  Index max_bond = 64;
  /// Singular values at or below svd_cutoff * (largest singular value) are dropped.
  double svd_cutoff = 1e-10;
  /// Throw BondOverflow instead of cutting above-cutoff values at max_bond.
  bool forbid_truncation = false;

  void validate() const;
};

/// Singular values of one bipartition, largest first.
struct SchmidtSpectrum {
  std::vector<double> values;

  double weight() const;
  /// Von Neumann entropy of the squared values, in bits.
  double entropy_bits() const;
};

struct LocalOperator {
  Index site;
  Matrix op;
};

/// Tensor-train state with a tracked orthogonality center.
///
/// Sites in [0, lo) are left-canonical and sites in (hi, size) are
/// right-canonical. The chain is in mixed canonical form when lo == hi,
/// which is the state every mutating operation leaves behind.
class MpsChain {
 public:
  MpsChain(std::vector<SiteTensor> sites, std::vector<SiteLabel> labels);

  static MpsChain product(const std::vector<std::vector<cplx>>& locals,
                          std::vector<SiteLabel> labels);

  Index size() const { return sites_.size(); }
  const SiteTensor& site(Index i) const { return sites_.at(i); }
  const SiteLabel& label(Index i) const { return labels_.at(i); }
  const std::vector<SiteLabel>& labels() const { return labels_; }
  std::optional<Index> position_of(const SiteLabel& label) const;

  std::optional<Index> center() const;
  double truncation_weight() const { return truncation_weight_; }
  Index max_bond_dimension() const;
  std::vector<Index> bond_dimensions() const;

  void canonicalize(Index target);

  /// Apply a unitary to the contiguous window starting at `first`.
  ///
  /// `output_order`, if non-empty, permutes the window afterwards: output
  /// slot j receives input window site output_order[j] (tensor leg and
  /// label). The window is re-split left to right, leaving the center on
  /// the last window site. Returns the discarded weight of this call.
  double apply_gate(const BlockedGate& gate, Index first, const TruncationPolicy& policy,
                    const ExecutionPolicy& exec = {},
                    std::span<const Index> output_order = {});

  /// Exchange sites i and i+1 (legs and labels). The center ends on i+1
  /// when `center_right`, on i otherwise.
  double swap_adjacent(Index i, const TruncationPolicy& policy, bool center_right = true);

  /// Schmidt values across the bond between sites `bond` and `bond + 1`.
  /// Moves the center but leaves the state vector untouched.
  SchmidtSpectrum schmidt_at_bond(Index bond);

  /// <psi| (x)_i O_i |psi> for operators on distinct sites.
  cplx expect_local(std::span<const LocalOperator> ops) const;

  /// Reduced density matrices rho[s, s'] = <s|rho|s'> of sites first..last.
  std::vector<Matrix> reduced_densities(Index first, Index last) const;
  Matrix reduced_density(Index site) const { return reduced_densities(site, site).front(); }

  /// Insert a product site in front of `position`; the bond there passes through it.
  void insert_product_site(Index position, std::span<const cplx> local, SiteLabel label);

  /// <psi|psi> by contracting the whole chain (no canonical-form shortcut).
  double norm_squared() const;

  /// Amplitudes in the order of the sites (first site most significant).
  /// Only meant for small chains in tests.
  std::vector<cplx> to_dense() const;

 private:
  struct Window {
    std::vector<cplx> theta;
    Index left = 1;
    Index right = 1;
    std::vector<Index> dims;
  };

  Window contract_window(Index first, Index count) const;
  /// Re-split a window left to right. The center lands on the last window
  /// site, or on the one before it when `center_left`.
  double split_window(Window window, Index first, const TruncationPolicy& policy,
                      bool center_left = false);
  /// Make every site outside [first, last] canonical.
  void focus(Index first, Index last);
  void left_orthonormalize(Index i);
  void right_orthonormalize(Index i);
  Matrix left_environment_step(const Matrix& env, Index site, const Matrix* op) const;

  std::vector<SiteTensor> sites_;
  std::vector<SiteLabel> labels_;
  Index lo_ = 0;
  Index hi_ = 0;
  double truncation_weight_ = 0.0;
};

/// Keep count and discarded weight for descending singular values.
struct TruncationDecision {
  Index keep;
  double discarded;
};
TruncationDecision decide_truncation(std::span<const double> singular_values,
                                     const TruncationPolicy& policy);

}  // namespace wgqed
