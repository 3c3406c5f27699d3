// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// RBF-kernel SVM trained with a simplified sequential dual optimizer: sweep
// the examples, pair each KKT violator with a random partner, solve the
// two-variable subproblem analytically. Good enough at this scale; no
// working-set heuristics.

#ifndef ATTNSLICE_SVM_HPP
#define ATTNSLICE_SVM_HPP

#include <cmath>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/linear.hpp"
#include "attnslice/matrix.hpp"
#include "attnslice/rng.hpp"

namespace attnslice {

/// Kernel SVM in dual form; coef[i] = alpha_i * y_i for the retained
/// support vectors, operating on raw (unstandardized) features.
struct KernelModel {
  Matrix support;  // one support vector per row
  Vec coef;
  double bias = 0.0;
  double gamma = 1.0;

  double kernel(const double* a, const double* b, std::size_t n) const {
    double d2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = a[j] - b[j];
      d2 += d * d;
    }
    return std::exp(-gamma * d2);
  }

  double decision(const double* x) const {
    double s = bias;
    for (std::size_t i = 0; i < support.rows; ++i)
      s += coef[i] * kernel(support.row(i), x, support.cols);
    return s;
  }

  Vec decision_all(const Matrix& x) const {
    if (x.cols != support.cols) throw DataError("feature width does not match the model");
    Vec out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = decision(x.row(i));
    return out;
  }
};

/// Default bandwidth: 1 / (D * mean per-feature variance).
inline double rbf_gamma_heuristic(const Matrix& x) {
  double total_var = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) mean += x.at(i, j);
    mean /= static_cast<double>(x.rows);
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double d = x.at(i, j) - mean;
      var += d * d;
    }
    total_var += var / static_cast<double>(x.rows);
  }
  const double mean_var = total_var / static_cast<double>(x.cols);
  return 1.0 / (static_cast<double>(x.cols) * std::max(mean_var, 1e-12));
}

/// Simplified SMO. gamma <= 0 selects the variance heuristic. Stops after
/// stable_passes sweeps without an update or at the sweep cap.
inline KernelModel train_rbf_svm(const Matrix& x, const std::vector<int>& y, double c = 1.0,
                                 double gamma = 0.0, std::uint64_t seed = 1,
                                 double kkt_tol = 1e-3, int stable_passes = 5,
                                 int max_sweeps = 200) {
  detail::check_binary_labels(x, y);
  if (c <= 0.0) throw ConfigError("svm C must be > 0");
  const std::size_t n = x.rows;
  if (gamma <= 0.0) gamma = rbf_gamma_heuristic(x);

  Matrix k(n, n);
  {
    KernelModel probe;
    probe.gamma = gamma;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        k.at(i, j) = k.at(j, i) = probe.kernel(x.row(i), x.row(j), x.cols);
  }
  Vec yy(n);
  for (std::size_t i = 0; i < n; ++i) yy[i] = y[i] ? 1.0 : -1.0;

  Vec alpha(n, 0.0);
  double b = 0.0;
  // Cached errors e[k] = f(k) - y_k, updated exactly after every alpha move.
  Vec e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = -yy[i];

  Rng rng(mix_seed(seed, 0x534d4f));
  int calm = 0;
  for (int sweep = 0; sweep < max_sweeps && calm < stable_passes; ++sweep) {
    int changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = e[i];
      const bool violates = (yy[i] * ei < -kkt_tol && alpha[i] < c) ||
                            (yy[i] * ei > kkt_tol && alpha[i] > 0.0);
      if (!violates) continue;
      std::size_t j = rng.uniform_int(static_cast<std::uint64_t>(n - 1));
      if (j >= i) ++j;
      const double ej = e[j];

      double lo, hi;
      if (yy[i] != yy[j]) {
        lo = std::max(0.0, alpha[j] - alpha[i]);
        hi = std::min(c, c + alpha[j] - alpha[i]);
      } else {
        lo = std::max(0.0, alpha[i] + alpha[j] - c);
        hi = std::min(c, alpha[i] + alpha[j]);
      }
      if (lo >= hi) continue;
      const double eta = 2.0 * k.at(i, j) - k.at(i, i) - k.at(j, j);
      if (eta >= 0.0) continue;

      double aj = alpha[j] - yy[j] * (ei - ej) / eta;
      aj = std::min(hi, std::max(lo, aj));
      if (std::abs(aj - alpha[j]) < 1e-7) continue;
      const double ai = alpha[i] + yy[i] * yy[j] * (alpha[j] - aj);

      const double b1 = b - ei - yy[i] * (ai - alpha[i]) * k.at(i, i) -
                        yy[j] * (aj - alpha[j]) * k.at(i, j);
      const double b2 = b - ej - yy[i] * (ai - alpha[i]) * k.at(i, j) -
                        yy[j] * (aj - alpha[j]) * k.at(j, j);
      const double b_old = b;
      if (ai > 0.0 && ai < c) b = b1;
      else if (aj > 0.0 && aj < c) b = b2;
      else b = 0.5 * (b1 + b2);

      const double di = yy[i] * (ai - alpha[i]);
      const double dj = yy[j] * (aj - alpha[j]);
      const double db = b - b_old;
      for (std::size_t t = 0; t < n; ++t) e[t] += di * k.at(i, t) + dj * k.at(j, t) + db;
      alpha[i] = ai;
      alpha[j] = aj;
      ++changed;
    }
    calm = changed == 0 ? calm + 1 : 0;
  }

  KernelModel m;
  m.gamma = gamma;
  m.bias = b;
  std::size_t n_sv = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (alpha[i] > 0.0) ++n_sv;
  m.support = Matrix(n_sv, x.cols);
  m.coef.reserve(n_sv);
  std::size_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] <= 0.0) continue;
    std::copy(x.row(i), x.row(i) + x.cols, m.support.row(r));
    m.coef.push_back(alpha[i] * yy[i]);
    ++r;
  }
  return m;
}

}  // namespace attnslice

#endif  // ATTNSLICE_SVM_HPP
