#include "siglab/matrix.hpp"

#include <cmath>
#include <string>

namespace siglab {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double log_sigmoid(double x) {
  // Branch keeps the exponent argument non-positive in both cases.
  if (x >= 0.0) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

Matrix l2_normalize_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    double norm = std::sqrt(dot(row, row, m.cols()));
    if (norm < 1e-30) {
      throw ZeroRow("row " + std::to_string(i) + " has norm " + std::to_string(norm));
    }
    double inv = 1.0 / norm;
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = row[j] * inv;
  }
  return out;
}

Matrix row_log_softmax(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    double mx = row[0];
    for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) sum += std::exp(row[j] - mx);
    double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = row[j] - lse;
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                        " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("add");
  Matrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = a.data()[k] + b.data()[k];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("subtract");
  Matrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = a.data()[k] - b.data()[k];
  return out;
}

Matrix scale(const Matrix& m, double s) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.size(); ++k) out.data()[k] = m.data()[k] * s;
  return out;
}

}  // namespace siglab
