#pragma once

// Dense row-major double matrix plus the handful of kernels the model needs.
// Matrix products are delegated to BLAS dgemm; everything else is plain loops.

#include <cblas.h>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "gmss/errors.hpp"
#include "gmss/rng.hpp"

namespace gmss {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {}

  // Constructs from explicit values; rejects size mismatch and non-finite
  // entries, which is the construction invariant every loader relies on.
  static Matrix from_values(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) {
      throw DimensionError("matrix values length " + std::to_string(values.size()) +
                           " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.v_ = std::move(values);
    if (!m.all_finite()) throw NumericError("matrix constructed with non-finite values");
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<double> vals;
    std::size_t r = rows.size(), c = r ? rows.begin()->size() : 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged initializer");
      vals.insert(vals.end(), row.begin(), row.end());
    }
    return from_values(r, c, std::move(vals));
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  static Matrix filled(std::size_t rows, std::size_t cols, double value) {
    Matrix m(rows, cols);
    for (auto& x : m.v_) x = value;
    return m;
  }

  static Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
    Matrix m(rows, cols);
    for (auto& x : m.v_) x = rng.next_uniform(lo, hi);
    return m;
  }

  static Matrix random_gaussian(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
    Matrix m(rows, cols);
    for (auto& x : m.v_) x = sigma * rng.next_gaussian();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& at(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void fill(double value) {
    for (auto& x : v_) x = value;
  }

  Matrix reshaped(std::size_t rows, std::size_t cols) const {
    if (rows * cols != v_.size()) throw DimensionError("reshape size mismatch");
    Matrix m = *this;
    m.rows_ = rows;
    m.cols_ = cols;
    return m;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

// C = beta*C + alpha*op(A)*op(B), row-major dgemm.
inline void gemm(double alpha, const Matrix& a, bool trans_a, const Matrix& b, bool trans_b,
                 double beta, Matrix& c) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t kb = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (k != kb) {
    throw DimensionError("matmul inner dimension mismatch: " + a.shape_str() +
                         (trans_a ? "^T" : "") + " * " + b.shape_str() + (trans_b ? "^T" : ""));
  }
  if (c.rows() != m || c.cols() != n) throw DimensionError("matmul output shape mismatch");
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (beta == 0.0) c.fill(0.0);
    return;
  }
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(k), alpha, a.data(), static_cast<int>(a.cols()), b.data(),
              static_cast<int>(b.cols()), beta, c.data(), static_cast<int>(c.cols()));
}

inline Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a = false, bool trans_b = false) {
  Matrix c(trans_a ? a.cols() : a.rows(), trans_b ? b.rows() : b.cols());
  gemm(1.0, a, trans_a, b, trans_b, 0.0, c);
  return c;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw DimensionError("add shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

inline Matrix scaled(const Matrix& a, double s) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= s;
  return c;
}

inline void axpy(double alpha, const Matrix& x, Matrix& y) {
  if (!x.same_shape(y)) throw DimensionError("axpy shape mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw DimensionError("max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace gmss
