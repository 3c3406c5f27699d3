// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Linear classifiers trained from scratch: L1-regularized logistic
// regression (accelerated proximal gradient with soft-thresholding) and a
// hinge-loss linear SVM (deterministic full-batch subgradient descent).
// Both standardize features internally and store the standardization so
// prediction applies it identically.

#ifndef ATTNSLICE_LINEAR_HPP
#define ATTNSLICE_LINEAR_HPP

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/matrix.hpp"

namespace attnslice {

namespace detail {

struct Standardizer {
  Vec mean, std;

  void fit(const Matrix& x) {
    mean.assign(x.cols, 0.0);
    std.assign(x.cols, 0.0);
    const double n = static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = 0; j < x.cols; ++j) mean[j] += x.at(i, j);
    for (std::size_t j = 0; j < x.cols; ++j) mean[j] /= n;
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = 0; j < x.cols; ++j) {
        const double d = x.at(i, j) - mean[j];
        std[j] += d * d;
      }
    for (std::size_t j = 0; j < x.cols; ++j) {
      std[j] = std::sqrt(std[j] / n);
      if (std[j] < 1e-12) std[j] = 1.0;  // constant feature maps to 0
    }
  }

  Matrix apply(const Matrix& x) const {
    Matrix z(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = 0; j < x.cols; ++j) z.at(i, j) = (x.at(i, j) - mean[j]) / std[j];
    return z;
  }
};

inline void check_binary_labels(const Matrix& x, const std::vector<int>& y) {
  if (x.rows != y.size()) throw DataError("label count does not match row count");
  if (x.rows < 2 || x.cols < 1) throw DataError("need at least 2 rows and 1 feature");
  int pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
    pos += v;
  }
  if (pos == 0 || pos == static_cast<int>(y.size()))
    throw DataError("degenerate single-class training labels");
}

// Largest squared singular value of [Z 1], for the logistic step size.
inline double augmented_spectral_bound(const Matrix& z) {
  Vec v(z.cols + 1, 1.0 / std::sqrt(static_cast<double>(z.cols + 1)));
  Vec u(z.rows, 0.0);
  double s2 = 1.0;
  for (int it = 0; it < 60; ++it) {
    for (std::size_t i = 0; i < z.rows; ++i) u[i] = dot(z.row(i), v.data(), z.cols) + v[z.cols];
    Vec w(z.cols + 1, 0.0);
    for (std::size_t i = 0; i < z.rows; ++i) {
      axpy_raw(u[i], z.row(i), w.data(), z.cols);
      w[z.cols] += u[i];
    }
    double norm = std::sqrt(dot(w.data(), w.data(), w.size()));
    if (norm <= 0.0) return 1.0;
    s2 = norm;
    for (double& x : w) x /= norm;
    v = std::move(w);
  }
  return s2;
}

}  // namespace detail

/// Linear decision model with stored standardization; used for both the
/// L1 logistic regression and the linear SVM.
struct LinearModel {
  Vec weights;
  double bias = 0.0;
  std::string penalty;     // "l1" or "l2"
  double reg = 0.0;        // lambda for l1, C for l2
  Vec feat_mean, feat_std;

  double decision(const double* x) const {
    double s = bias;
    for (std::size_t j = 0; j < weights.size(); ++j)
      s += weights[j] * (x[j] - feat_mean[j]) / feat_std[j];
    return s;
  }

  Vec decision_all(const Matrix& x) const {
    if (x.cols != weights.size()) throw DataError("feature width does not match the model");
    Vec out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = decision(x.row(i));
    return out;
  }

  Vec predict_proba(const Matrix& x) const {
    Vec out = decision_all(x);
    for (double& v : out) v = sigmoid(v);
    return out;
  }
};

/// Mean BCE + lambda * ||w||_1 at standardized features; the objective the
/// lasso trainer minimizes, exposed for oracle comparison in tests.
inline double lasso_objective(const Matrix& z, const std::vector<int>& y, const Vec& w, double bias,
                              double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows; ++i) {
    const double logit = dot(z.row(i), w.data(), z.cols) + bias;
    loss += softplus(logit) - static_cast<double>(y[i]) * logit;
  }
  loss /= static_cast<double>(z.rows);
  double l1 = 0.0;
  for (double v : w) l1 += std::abs(v);
  return loss + lambda * l1;
}

/// L1-penalized logistic regression via accelerated proximal gradient.
/// Stops when the objective changes by less than tol; after max_iter
/// iterations without convergence, warns and returns the best iterate.
inline LinearModel train_lasso(const Matrix& x, const std::vector<int>& y, double lambda,
                               double tol = 1e-6, int max_iter = 100000) {
  detail::check_binary_labels(x, y);
  if (lambda < 0.0) throw ConfigError("lasso lambda must be >= 0");

  LinearModel m;
  m.penalty = "l1";
  m.reg = lambda;
  detail::Standardizer st;
  st.fit(x);
  m.feat_mean = st.mean;
  m.feat_std = st.std;
  const Matrix z = st.apply(x);
  const std::size_t n = z.rows, d = z.cols;

  const double lip = detail::augmented_spectral_bound(z) / (4.0 * static_cast<double>(n));
  const double step = 1.0 / std::max(lip, 1e-12);

  double prior = 0.0;
  for (int v : y) prior += v;
  prior /= static_cast<double>(n);

  Vec w(d, 0.0), w_prev(d, 0.0), yw(d, 0.0), grad(d, 0.0);
  double b = std::log(prior / (1.0 - prior)), b_prev = b, yb = b;
  Vec best_w = w;
  double best_b = b, best_obj = lasso_objective(z, y, w, b, lambda);
  double t_acc = 1.0, prev_obj = best_obj;
  bool converged = false;

  Vec resid(n);
  for (int it = 0; it < max_iter; ++it) {
    grad.assign(d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(dot(z.row(i), yw.data(), d) + yb);
      resid[i] = p - static_cast<double>(y[i]);
      gb += resid[i];
    }
    for (std::size_t i = 0; i < n; ++i) axpy_raw(resid[i], z.row(i), grad.data(), d);
    const double inv_n = 1.0 / static_cast<double>(n);

    w_prev = w;
    b_prev = b;
    const double thresh = step * lambda;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = yw[j] - step * grad[j] * inv_n;
      w[j] = v > thresh ? v - thresh : (v < -thresh ? v + thresh : 0.0);
    }
    b = yb - step * gb * inv_n;

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    const double mom = (t_acc - 1.0) / t_next;
    for (std::size_t j = 0; j < d; ++j) yw[j] = w[j] + mom * (w[j] - w_prev[j]);
    yb = b + mom * (b - b_prev);
    t_acc = t_next;

    const double obj = lasso_objective(z, y, w, b, lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
    if (obj > prev_obj) {  // adaptive restart kills momentum oscillation
      t_acc = 1.0;
      yw = w;
      yb = b;
    }
    if (it > 0 && std::abs(prev_obj - obj) < tol) {
      converged = true;
      break;
    }
    prev_obj = obj;
  }
  if (!converged)
    std::cerr << "warning: lasso did not converge in " << max_iter
              << " iterations; returning the best iterate\n";
  m.weights = std::move(best_w);
  m.bias = best_b;
  return m;
}

/// Mean hinge loss + ||w||^2 / (2C); duplication of the dataset leaves this
/// objective, and therefore the trained boundary, unchanged.
inline double hinge_objective(const Matrix& z, const std::vector<int>& y, const Vec& w, double bias,
                              double c) {
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows; ++i) {
    const double yy = y[i] ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - yy * (dot(z.row(i), w.data(), z.cols) + bias));
  }
  loss /= static_cast<double>(z.rows);
  return loss + dot(w.data(), w.data(), w.size()) / (2.0 * c);
}

/// Linear SVM by deterministic full-batch subgradient descent on the hinge
/// objective, keeping the best-objective iterate over a fixed epoch budget.
inline LinearModel train_linear_svm(const Matrix& x, const std::vector<int>& y, double c = 1.0,
                                    int epochs = 2000) {
  detail::check_binary_labels(x, y);
  if (c <= 0.0) throw ConfigError("svm C must be > 0");

  LinearModel m;
  m.penalty = "l2";
  m.reg = c;
  detail::Standardizer st;
  st.fit(x);
  m.feat_mean = st.mean;
  m.feat_std = st.std;
  const Matrix z = st.apply(x);
  const std::size_t n = z.rows, d = z.cols;
  const double lambda = 1.0 / c;

  Vec w(d, 0.0), grad(d);
  double b = 0.0;
  Vec best_w = w;
  double best_b = b, best_obj = hinge_objective(z, y, w, b, c);

  for (int t = 1; t <= epochs; ++t) {
    grad.assign(d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double yy = y[i] ? 1.0 : -1.0;
      if (yy * (dot(z.row(i), w.data(), d) + b) < 1.0) {
        axpy_raw(-yy, z.row(i), grad.data(), d);
        gb -= yy;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    for (std::size_t j = 0; j < d; ++j) w[j] -= eta * (lambda * w[j] + grad[j] * inv_n);
    b -= eta * gb * inv_n;

    const double obj = hinge_objective(z, y, w, b, c);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
  }
  m.weights = std::move(best_w);
  m.bias = best_b;
  return m;
}

}  // namespace attnslice

#endif  // ATTNSLICE_LINEAR_HPP
