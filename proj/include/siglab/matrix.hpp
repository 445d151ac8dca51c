#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "siglab/errors.hpp"

namespace siglab {

// Dense row-major f64 matrix. All reductions run in a fixed left-to-right
// order so results are bit-reproducible for a given build; there is no
// BLAS backend and no reassociation anywhere.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Neumaier-compensated accumulator. Deterministic (still strictly
// left-to-right) but with error independent of the number of terms,
// which keeps cross-strategy loss comparisons inside tight tolerances.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// -- stable scalar primitives -------------------------------------------

// log(1/(1+e^{-x})), overflow-free for |x| up to at least 1e6, always <= 0.
double log_sigmoid(double x);

// 1/(1+e^{-x}) without overflow.
double sigmoid(double x);

// -- matrix kernels -----------------------------------------------------

// Scale every row to unit Euclidean norm. Throws ZeroRow if a row norm
// is below 1e-30.
Matrix l2_normalize_rows(const Matrix& m);

// Row-wise log-softmax, stabilized by subtracting the row maximum before
// exponentiation; each output row has logsumexp exactly ~0.
Matrix row_log_softmax(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

// Fixed-order dot product of two length-d ranges.
double dot(const double* a, const double* b, std::size_t d);

}  // namespace siglab
