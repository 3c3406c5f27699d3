// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bootstrap confidence machinery: train many model instances on resampled
// training sets, score each on the fixed test split, and summarize the AUC
// distribution. Each instance derives its PRNG from (seed, instance index),
// so results do not depend on scheduling.

#ifndef ATTNSLICE_BOOTSTRAP_HPP
#define ATTNSLICE_BOOTSTRAP_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/matrix.hpp"
#include "attnslice/metrics.hpp"
#include "attnslice/parallel.hpp"
#include "attnslice/rng.hpp"

namespace attnslice {

struct BootstrapResult {
  Vec scores;                  // one AUC per surviving instance
  double mean = 0.0;
  double ci_low = 0.0;         // 2.5th percentile
  double ci_high = 0.0;        // 97.5th percentile
  double ci_half_width = 0.0;  // (ci_high - ci_low) / 2
  int skipped = 0;             // instances whose resamples stayed single-class
};

namespace detail {

inline double percentile(Vec sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

/// trainer(X_resampled, y_resampled) -> scorer; scorer(X_test) -> scores.
/// Resamples are the training-set size, drawn with replacement; a resample
/// with one class is redrawn up to 10 times, then the instance is skipped.
template <typename Trainer>
BootstrapResult bootstrap_auc(Trainer&& trainer, const Matrix& x_train,
                              const std::vector<int>& y_train, const Matrix& x_test,
                              const std::vector<int>& y_test, int n_instances = 100,
                              std::uint64_t seed = 1, int threads = 0) {
  if (x_train.rows != y_train.size() || x_test.rows != y_test.size())
    throw DataError("label count does not match row count");
  if (x_train.rows < 2) throw DataError("bootstrap needs at least 2 training rows");
  if (n_instances < 1) throw ConfigError("bootstrap needs at least 1 instance");
  const std::size_t n = x_train.rows;

  Vec scores(static_cast<std::size_t>(n_instances), -1.0);  // -1 marks skipped
  parallel_for(
      static_cast<std::size_t>(n_instances),
      [&](std::size_t inst) {
        Rng rng(mix_seed(seed, 0xb007 + inst));
        Matrix xb(n, x_train.cols);
        std::vector<int> yb(n);
        bool ok = false;
        for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
          int pos = 0;
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = rng.uniform_int(static_cast<std::uint64_t>(n));
            std::copy(x_train.row(r), x_train.row(r) + x_train.cols, xb.row(i));
            yb[i] = y_train[r];
            pos += yb[i];
          }
          ok = pos > 0 && pos < static_cast<int>(n);
        }
        if (!ok) return;  // stayed single-class; skip this instance
        const auto scorer = trainer(xb, yb);
        scores[inst] = roc_auc(y_test, scorer(x_test));
      },
      static_cast<unsigned>(std::max(0, threads)));

  BootstrapResult res;
  for (double s : scores) {
    if (s < 0.0) ++res.skipped;
    else res.scores.push_back(s);
  }
  if (res.scores.empty()) throw DataError("every bootstrap resample was single-class");
  for (double s : res.scores) res.mean += s;
  res.mean /= static_cast<double>(res.scores.size());
  Vec sorted = res.scores;
  std::sort(sorted.begin(), sorted.end());
  res.ci_low = detail::percentile(sorted, 0.025);
  res.ci_high = detail::percentile(sorted, 0.975);
  res.ci_half_width = 0.5 * (res.ci_high - res.ci_low);
  return res;
}

}  // namespace attnslice

#endif  // ATTNSLICE_BOOTSTRAP_HPP
