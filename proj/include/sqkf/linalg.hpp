#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "sqkf/errors.hpp"
#include "sqkf/matrix.hpp"
#include "sqkf/triangular.hpp"

namespace sqkf {

/// Relative asymmetry tolerated by cholesky() before rejecting the input.
inline constexpr double kSymmetryTolerance = 1e-10;

namespace detail {

/// Householder QR of an m x n matrix (m >= n), computing only R.
/// The reflectors are applied in place; the orthogonal factor is never
/// materialized. Rows whose remaining column is exactly zero are left
/// alone, which yields a zero diagonal entry for rank-deficient input.
template <typename Scalar>
void householder_r_in_place(Matrix<Scalar>& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<Scalar> v(m);
  for (std::size_t k = 0; k < n; ++k) {
    Scalar norm_sq = 0;
    for (std::size_t i = k; i < m; ++i) norm_sq += a(i, k) * a(i, k);
    const Scalar norm_x = std::sqrt(norm_sq);
    if (norm_x == Scalar(0)) continue;

    // alpha has the opposite sign of the pivot so v = x - alpha*e1 never
    // cancels.
    const Scalar alpha = a(k, k) >= Scalar(0) ? -norm_x : norm_x;
    v[k] = a(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i] = a(i, k);
    Scalar vtv = 0;
    for (std::size_t i = k; i < m; ++i) vtv += v[i] * v[i];

    a(k, k) = alpha;
    for (std::size_t i = k + 1; i < m; ++i) a(i, k) = Scalar(0);
    for (std::size_t j = k + 1; j < n; ++j) {
      Scalar dot = 0;
      for (std::size_t i = k; i < m; ++i) dot += v[i] * a(i, j);
      const Scalar f = Scalar(2) * dot / vtv;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= f * v[i];
    }
  }
}

}  // namespace detail

/// Upper-triangular Cholesky factor U with U^T U = M.
///
/// M must be square, symmetric within kSymmetryTolerance (relative to its
/// largest entry), and positive definite. Only the upper triangle of M is
/// read once symmetry has been checked. No pivoting: a nonpositive pivot
/// throws NotPositiveDefinite.
template <typename Scalar>
UpperTriangular<Scalar> cholesky(const Matrix<Scalar>& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("cholesky: matrix not square");
  }
  const Scalar scale = m.max_abs();
  if (scale > Scalar(0) &&
      m.max_asymmetry() > Scalar(kSymmetryTolerance) * scale) {
    throw NotSymmetric("cholesky: asymmetry exceeds tolerance");
  }

  const std::size_t n = m.rows();
  UpperTriangular<Scalar> u(n);
  for (std::size_t k = 0; k < n; ++k) {
    Scalar pivot = m(k, k);
    for (std::size_t i = 0; i < k; ++i) pivot -= u(i, k) * u(i, k);
    if (!(pivot > Scalar(0))) {
      throw NotPositiveDefinite("cholesky: nonpositive pivot at index " +
                                std::to_string(k));
    }
    const Scalar ukk = std::sqrt(pivot);
    u.set(k, k, ukk);
    for (std::size_t j = k + 1; j < n; ++j) {
      Scalar acc = m(k, j);
      for (std::size_t i = 0; i < k; ++i) acc -= u(i, k) * u(i, j);
      u.set(k, j, acc / ukk);
    }
  }
  return u;
}

/// QR-factorize [top; bottom] and return the n x n upper-triangular R,
/// sign-normalized to a nonnegative diagonal.
///
/// R satisfies R^T R = top^T top + bottom^T bottom: given square roots of
/// two matrices this is the square root of their sum. The orthogonal
/// factor cancels in that identity and is never formed. Rank-deficient
/// stacks produce zero diagonal entries rather than an error.
template <typename Scalar>
UpperTriangular<Scalar> qr_r(const Matrix<Scalar>& top,
                             const Matrix<Scalar>& bottom) {
  if (top.cols() != bottom.cols()) {
    throw DimensionMismatch("qr_r: column counts differ (" +
                            std::to_string(top.cols()) + " vs " +
                            std::to_string(bottom.cols()) + ")");
  }
  const std::size_t n = top.cols();
  const std::size_t p = top.rows();
  const std::size_t q = bottom.rows();
  if (p + q < n) {
    throw DimensionMismatch("qr_r: stacked matrix has fewer rows than columns");
  }

  Matrix<Scalar> stacked(p + q, n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j) stacked(i, j) = top(i, j);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < n; ++j) stacked(p + i, j) = bottom(i, j);

  detail::householder_r_in_place(stacked);

  UpperTriangular<Scalar> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar flip = stacked(i, i) < Scalar(0) ? Scalar(-1) : Scalar(1);
    for (std::size_t j = i; j < n; ++j) r.set(i, j, flip * stacked(i, j));
  }
  return r;
}

namespace detail {

template <typename Scalar>
void require_nonsingular(const UpperTriangular<Scalar>& u, const char* op) {
  const Scalar tol = static_cast<Scalar>(u.dim()) *
                     std::numeric_limits<Scalar>::epsilon() *
                     u.max_abs_diagonal();
  for (std::size_t i = 0; i < u.dim(); ++i) {
    if (std::abs(u(i, i)) <= tol) {
      throw SingularFactor(std::string(op) + ": diagonal entry " +
                           std::to_string(i) + " at or below tolerance");
    }
  }
}

}  // namespace detail

/// Solve L X = B where L is the transpose of the given upper-triangular
/// factor (forward substitution, column by column).
template <typename Scalar>
Matrix<Scalar> solve_lower(const UpperTriangular<Scalar>& u,
                           const Matrix<Scalar>& b) {
  if (b.rows() != u.dim()) {
    throw DimensionMismatch("solve_lower: rhs has " +
                            std::to_string(b.rows()) + " rows, factor dim " +
                            std::to_string(u.dim()));
  }
  detail::require_nonsingular(u, "solve_lower");
  const std::size_t n = u.dim();
  Matrix<Scalar> x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      Scalar acc = b(i, c);
      for (std::size_t j = 0; j < i; ++j) acc -= u(j, i) * x(j, c);
      x(i, c) = acc / u(i, i);
    }
  }
  return x;
}

/// Solve U X = B for upper-triangular U (back substitution).
template <typename Scalar>
Matrix<Scalar> solve_upper(const UpperTriangular<Scalar>& u,
                           const Matrix<Scalar>& b) {
  if (b.rows() != u.dim()) {
    throw DimensionMismatch("solve_upper: rhs has " +
                            std::to_string(b.rows()) + " rows, factor dim " +
                            std::to_string(u.dim()));
  }
  detail::require_nonsingular(u, "solve_upper");
  const std::size_t n = u.dim();
  Matrix<Scalar> x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t ii = 0; ii < n; ++ii) {
      const std::size_t i = n - 1 - ii;
      Scalar acc = b(i, c);
      for (std::size_t j = i + 1; j < n; ++j) acc -= u(i, j) * x(j, c);
      x(i, c) = acc / u(i, i);
    }
  }
  return x;
}

}  // namespace sqkf
