#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sqkf/errors.hpp"
#include "sqkf/matrix.hpp"

namespace sqkf {

/// Upper-triangular square matrix with nonnegative diagonal.
///
/// This is the carrier for every "matrix square root" in the library:
/// a factor U represents the symmetric PSD matrix U^T U. The strictly
/// lower part is identically zero and the diagonal is normalized to be
/// >= 0, which makes factor-valued operations deterministic and
/// comparable entrywise. A zero diagonal entry marks a rank-deficient
/// factor; triangular solves reject those, everything else accepts them.
template <typename Scalar>
class UpperTriangular {
 public:
  explicit UpperTriangular(std::size_t dim)
      : dim_(dim), data_(dim * dim, Scalar(0)) {
    if (dim < 1) throw DimensionMismatch("UpperTriangular: dim must be >= 1");
  }

  static UpperTriangular identity(std::size_t dim) {
    return scaled_identity(dim, Scalar(1));
  }

  static UpperTriangular scaled_identity(std::size_t dim, Scalar value) {
    if (!(value >= Scalar(0))) {
      throw std::invalid_argument(
          "UpperTriangular: diagonal entries must be >= 0");
    }
    UpperTriangular u(dim);
    for (std::size_t i = 0; i < dim; ++i) u.set(i, i, value);
    return u;
  }

  /// Validating conversion for user-supplied factors (noise factors,
  /// initial covariance factors). Requires a square matrix with an
  /// exactly zero strict lower part and nonnegative diagonal.
  static UpperTriangular from_matrix(const Matrix<Scalar>& m) {
    if (m.rows() != m.cols()) {
      throw DimensionMismatch("UpperTriangular::from_matrix: matrix not square");
    }
    if (!m.all_finite()) {
      throw std::invalid_argument(
          "UpperTriangular::from_matrix: entries must be finite");
    }
    UpperTriangular u(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (!(m(i, i) >= Scalar(0))) {
        throw std::invalid_argument(
            "UpperTriangular::from_matrix: diagonal entries must be >= 0");
      }
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j < i && m(i, j) != Scalar(0)) {
          throw std::invalid_argument(
              "UpperTriangular::from_matrix: strict lower part must be zero");
        }
        if (j >= i) u.set(i, j, m(i, j));
      }
    }
    return u;
  }

  std::size_t dim() const { return dim_; }

  Scalar operator()(std::size_t i, std::size_t j) const {
    assert(i < dim_ && j < dim_);
    return data_[i * dim_ + j];
  }

  void set(std::size_t i, std::size_t j, Scalar value) {
    assert(i <= j && j < dim_);
    data_[i * dim_ + j] = value;
  }

  Matrix<Scalar> dense() const {
    Matrix<Scalar> m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  /// U^T U, the represented symmetric PSD matrix. The result is exactly
  /// symmetric because each off-diagonal pair is assigned from the same
  /// accumulated value.
  Matrix<Scalar> transpose_times_self() const {
    Matrix<Scalar> g(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i; j < dim_; ++j) {
        Scalar acc = 0;
        for (std::size_t k = 0; k <= i; ++k) acc += (*this)(k, i) * (*this)(k, j);
        g(i, j) = acc;
        g(j, i) = acc;
      }
    }
    return g;
  }

  /// U * M, exploiting the triangular structure.
  Matrix<Scalar> operator*(const Matrix<Scalar>& m) const {
    if (dim_ != m.rows()) {
      throw DimensionMismatch("UpperTriangular multiply: dim " +
                              std::to_string(dim_) + " vs " +
                              std::to_string(m.rows()) + " rows");
    }
    Matrix<Scalar> out(dim_, m.cols());
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        Scalar acc = 0;
        for (std::size_t k = i; k < dim_; ++k) acc += (*this)(i, k) * m(k, j);
        out(i, j) = acc;
      }
    }
    return out;
  }

  /// U^T v. Sampling noise as factor^T * standard_normal draws gives
  /// cov = U^T U, matching the factor the filter consumes.
  std::vector<Scalar> transpose_times(const std::vector<Scalar>& v) const {
    if (dim_ != v.size()) {
      throw DimensionMismatch("UpperTriangular transpose_times: dim " +
                              std::to_string(dim_) + " vs vector length " +
                              std::to_string(v.size()));
    }
    std::vector<Scalar> out(dim_, Scalar(0));
    for (std::size_t i = 0; i < dim_; ++i) {
      Scalar acc = 0;
      for (std::size_t k = 0; k <= i; ++k) acc += (*this)(k, i) * v[k];
      out[i] = acc;
    }
    return out;
  }

  Scalar max_abs_diagonal() const {
    Scalar m = 0;
    for (std::size_t i = 0; i < dim_; ++i)
      m = std::max(m, std::abs((*this)(i, i)));
    return m;
  }

  Scalar min_diagonal() const {
    Scalar m = (*this)(0, 0);
    for (std::size_t i = 1; i < dim_; ++i) m = std::min(m, (*this)(i, i));
    return m;
  }

  template <typename Other>
  UpperTriangular<Other> cast() const {
    UpperTriangular<Other> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j)
        out.set(i, j, static_cast<Other>((*this)(i, j)));
    return out;
  }

 private:
  std::size_t dim_;
  std::vector<Scalar> data_;
};

}  // namespace sqkf
