// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ATTNSLICE_MATRIX_HPP
#define ATTNSLICE_MATRIX_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace attnslice {

using Vec = std::vector<double>;

/// Dense row-major matrix. Deliberately minimal: storage plus the few
/// kernels the encoder and shallow models need.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double* row(std::size_t r) { return a.data() + r * cols; }
  const double* row(std::size_t r) const { return a.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  bool empty() const { return a.empty(); }

  bool operator==(const Matrix& o) const = default;
};

// Eight independent accumulator chains so the reduction is not latency-bound
// under strict floating-point semantics. The summation order is fixed, which
// keeps results reproducible.
inline double dot(const double* x, const double* y, std::size_t n) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 += x[i] * y[i];
    a1 += x[i + 1] * y[i + 1];
    a2 += x[i + 2] * y[i + 2];
    a3 += x[i + 3] * y[i + 3];
    a4 += x[i + 4] * y[i + 4];
    a5 += x[i + 5] * y[i + 5];
    a6 += x[i + 6] * y[i + 6];
    a7 += x[i + 7] * y[i + 7];
  }
  double acc = ((a0 + a1) + (a2 + a3)) + ((a4 + a5) + (a6 + a7));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

inline double dot(const Vec& x, const Vec& y) {
  assert(x.size() == y.size());
  return dot(x.data(), y.data(), x.size());
}

/// out (+)= M x
inline void matvec(const Matrix& m, const double* x, double* out, bool accumulate) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double v = dot(m.row(r), x, m.cols);
    out[r] = accumulate ? out[r] + v : v;
  }
}

/// out (+)= M^T x   (x has m.rows entries, out has m.cols)
inline void matvec_t(const Matrix& m, const double* x, double* out, bool accumulate) {
  if (!accumulate)
    for (std::size_t c = 0; c < m.cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double xr = x[r];
    const double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += xr * row[c];
  }
}

/// m += u v^T
inline void outer_add(Matrix& m, const double* u, const double* v) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double* row = m.row(r);
    const double ur = u[r];
    for (std::size_t c = 0; c < m.cols; ++c) row[c] += ur * v[c];
  }
}

inline void axpy_raw(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double squared_norm(const Vec& v) { return dot(v, v); }

inline double sigmoid(double x) {
  if (x >= 0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace attnslice

#endif  // ATTNSLICE_MATRIX_HPP
