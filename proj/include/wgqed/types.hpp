#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wgqed {

using cplx = std::complex<double>;
using Index = std::size_t;

using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RealVector = Eigen::VectorXd;

/// Raised when operator or tensor dimensions do not line up.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a bond would have to exceed max-bond and the policy forbids truncating it.
class BondOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Controls how the data-parallel kernels execute.
///
/// No kernel combines partial sums across threads, so output is bitwise
/// independent of the thread count either way; `deterministic` is carried
/// into run metadata.
struct ExecutionPolicy {
  bool parallel = true;
  bool deterministic = true;
};

}  // namespace wgqed
