#pragma once

// Dense reference routines for the unit tests. Everything here works on
// plain state vectors with the first site most significant and never calls
// into the tensor-network code.

#include <cmath>
#include <random>
#include <vector>

#include "wgqed/mps.hpp"

namespace wgqed::testing {

inline Matrix random_unitary(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

/// Random chain with the given physical dims and a bond cap, normalized.
inline MpsChain random_chain(const std::vector<Index>& dims, Index bond, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<SiteTensor> sites;
  std::vector<SiteLabel> labels;
  Index left = 1;
  for (Index i = 0; i < dims.size(); ++i) {
    const Index right = i + 1 == dims.size() ? 1 : bond;
    SiteTensor t(left, dims[i], right);
    for (auto& c : t.data()) c = {g(rng), g(rng)};
    sites.push_back(std::move(t));
    labels.push_back(SiteLabel::bin(Direction::left, static_cast<long>(i)));
    left = right;
  }
  const double n = std::sqrt(MpsChain(sites, labels).norm_squared());
  for (auto& c : sites[0].data()) c /= n;
  return MpsChain(std::move(sites), std::move(labels));
}

inline Index product(const std::vector<Index>& dims, Index first, Index last) {
  Index p = 1;
  for (Index i = first; i < last; ++i) p *= dims[i];
  return p;
}

/// Apply `u` to sites [first, first + count) of a dense vector.
inline std::vector<cplx> apply_dense(const std::vector<cplx>& psi, const std::vector<Index>& dims,
                                     Index first, Index count, const Matrix& u) {
  const Index l = product(dims, 0, first);
  const Index w = product(dims, first, first + count);
  const Index r = product(dims, first + count, dims.size());
  std::vector<cplx> out(psi.size(), 0.0);
  for (Index a = 0; a < l; ++a)
    for (Index i = 0; i < w; ++i)
      for (Index j = 0; j < w; ++j) {
        const cplx uij = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (uij == cplx{}) continue;
        for (Index b = 0; b < r; ++b) out[(a * w + i) * r + b] += uij * psi[(a * w + j) * r + b];
      }
  return out;
}

/// Exchange the tensor factors of sites i and i+1.
inline std::vector<cplx> swap_dense(const std::vector<cplx>& psi, const std::vector<Index>& dims,
                                    Index i) {
  const Index l = product(dims, 0, i);
  const Index d1 = dims[i];
  const Index d2 = dims[i + 1];
  const Index r = product(dims, i + 2, dims.size());
  std::vector<cplx> out(psi.size());
  for (Index a = 0; a < l; ++a)
    for (Index s = 0; s < d1; ++s)
      for (Index t = 0; t < d2; ++t)
        for (Index b = 0; b < r; ++b)
          out[((a * d2 + t) * d1 + s) * r + b] = psi[((a * d1 + s) * d2 + t) * r + b];
  return out;
}

/// rho of sites [0, cut) after tracing out the rest.
inline Matrix reduced_prefix(const std::vector<cplx>& psi, Index left_dim) {
  const Index right_dim = psi.size() / left_dim;
  Matrix m(left_dim, right_dim);
  for (Index a = 0; a < left_dim; ++a)
    for (Index b = 0; b < right_dim; ++b) m(a, b) = psi[a * right_dim + b];
  return m * m.adjoint();
}

/// Single-site reduced density matrix.
inline Matrix reduced_site(const std::vector<cplx>& psi, const std::vector<Index>& dims, Index i) {
  const Index l = product(dims, 0, i);
  const Index d = dims[i];
  const Index r = product(dims, i + 1, dims.size());
  Matrix rho = Matrix::Zero(d, d);
  for (Index a = 0; a < l; ++a)
    for (Index b = 0; b < r; ++b)
      for (Index s = 0; s < d; ++s)
        for (Index t = 0; t < d; ++t)
          rho(s, t) += psi[(a * d + s) * r + b] * std::conj(psi[(a * d + t) * r + b]);
  return rho;
}

inline double distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm_squared(const std::vector<cplx>& a) {
  double n = 0.0;
  for (const auto& c : a) n += std::norm(c);
  return n;
}

}  // namespace wgqed::testing
