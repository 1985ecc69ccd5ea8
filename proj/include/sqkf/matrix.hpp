#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "sqkf/errors.hpp"

namespace sqkf {

/// Dense row-major matrix with value semantics.
///
/// Immutable by convention once built: library operations return fresh
/// matrices instead of mutating operands, so values are safe to share
/// across threads. Scalar is the working precision (float or double);
/// all arithmetic accumulates in that precision.
template <typename Scalar>
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Scalar(0)) {
    if (rows < 1 || cols < 1) {
      throw DimensionMismatch("Matrix: rows and cols must be >= 1");
    }
  }

  Matrix(std::size_t rows, std::size_t cols,
         std::initializer_list<Scalar> values)
      : Matrix(rows, cols) {
    if (values.size() != rows * cols) {
      throw DimensionMismatch("Matrix: initializer size does not match shape");
    }
    std::size_t i = 0;
    for (Scalar v : values) {
      if (!std::isfinite(static_cast<double>(v))) {
        throw std::invalid_argument("Matrix: entries must be finite");
      }
      data_[i++] = v;
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Scalar operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  Scalar& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) {
      throw DimensionMismatch("Matrix multiply: " + shape_string(*this) +
                              " x " + shape_string(rhs));
    }
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < rhs.cols_; ++j) {
        Scalar acc = 0;
        for (std::size_t k = 0; k < cols_; ++k) {
          acc += (*this)(i, k) * rhs(k, j);
        }
        out(i, j) = acc;
      }
    }
    return out;
  }

  std::vector<Scalar> operator*(const std::vector<Scalar>& v) const {
    if (cols_ != v.size()) {
      throw DimensionMismatch("Matrix-vector multiply: " +
                              shape_string(*this) + " x vector of length " +
                              std::to_string(v.size()));
    }
    std::vector<Scalar> out(rows_, Scalar(0));
    for (std::size_t i = 0; i < rows_; ++i) {
      Scalar acc = 0;
      for (std::size_t k = 0; k < cols_; ++k) acc += (*this)(i, k) * v[k];
      out[i] = acc;
    }
    return out;
  }

  Matrix operator+(const Matrix& rhs) const {
    require_same_shape(rhs, "add");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out.data_[i] = data_[i] + rhs.data_[i];
    return out;
  }

  Matrix operator-(const Matrix& rhs) const {
    require_same_shape(rhs, "subtract");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out.data_[i] = data_[i] - rhs.data_[i];
    return out;
  }

  Matrix scaled(Scalar s) const {
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = s * data_[i];
    return out;
  }

  Scalar frobenius_norm() const {
    Scalar acc = 0;
    for (Scalar v : data_) acc += v * v;
    return std::sqrt(acc);
  }

  Scalar max_abs() const {
    Scalar m = 0;
    for (Scalar v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Largest |a_ij - a_ji|; zero for an exactly symmetric matrix.
  Scalar max_asymmetry() const {
    Scalar m = 0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }

  bool all_finite() const {
    for (Scalar v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename Other>
  Matrix<Other> cast() const {
    Matrix<Other> out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        out(i, j) = static_cast<Other>((*this)(i, j));
    return out;
  }

 private:
  static std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows_) + "x" + std::to_string(m.cols_);
  }

  void require_same_shape(const Matrix& rhs, const char* op) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
      throw DimensionMismatch(std::string("Matrix ") + op + ": " +
                              shape_string(*this) + " vs " +
                              shape_string(rhs));
    }
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<Scalar> data_;
};

template <typename Scalar>
std::vector<Scalar> vector_add(const std::vector<Scalar>& a,
                               const std::vector<Scalar>& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("vector_add: lengths " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
  }
  std::vector<Scalar> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename Scalar>
std::vector<Scalar> vector_sub(const std::vector<Scalar>& a,
                               const std::vector<Scalar>& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("vector_sub: lengths " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
  }
  std::vector<Scalar> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <typename Scalar>
Scalar vector_norm(const std::vector<Scalar>& v) {
  Scalar acc = 0;
  for (Scalar x : v) acc += x * x;
  return std::sqrt(acc);
}

template <typename To, typename From>
std::vector<To> vector_cast(const std::vector<From>& v) {
  std::vector<To> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<To>(v[i]);
  return out;
}

}  // namespace sqkf
