// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Feature-importance machinery: Lasso coefficient ranking, a fixed-round
// Boruta variant (real features must beat the best shuffled shadow copy to
// score a hit; a two-sided binomial test splits confirmed from rejected),
// and per-feature Welch tests between attention and random slices.

#ifndef ATTNSLICE_IMPORTANCE_HPP
#define ATTNSLICE_IMPORTANCE_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/forest.hpp"
#include "attnslice/linear.hpp"
#include "attnslice/rng.hpp"
#include "attnslice/slices.hpp"
#include "attnslice/stats.hpp"

namespace attnslice {

struct ImportanceEntry {
  int rank = 0;  // 1-based, by |weight| descending
  std::string name;
  int feature = 0;
  double weight = 0.0;
};

/// Nonzero Lasso coefficients sorted by magnitude; ties break on feature
/// index so the ranking is stable.
inline std::vector<ImportanceEntry> lasso_importance(const LinearModel& model,
                                                     const std::vector<std::string>& names) {
  if (model.weights.size() != names.size())
    throw DataError("feature name count does not match the model");
  std::vector<ImportanceEntry> out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (model.weights[j] == 0.0) continue;
    ImportanceEntry e;
    e.name = names[j];
    e.feature = static_cast<int>(j);
    e.weight = model.weights[j];
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    const double ma = std::abs(a.weight), mb = std::abs(b.weight);
    if (ma != mb) return ma > mb;
    return a.feature < b.feature;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

struct BorutaResult {
  std::vector<int> confirmed, tentative, rejected;  // feature indices
  std::vector<int> hits;                            // per feature, out of n_iter
  int n_iter = 0;
  int hit_threshold = 0;   // hits >= this -> confirmed
  int miss_threshold = 0;  // hits <= this -> rejected
};

namespace detail {

// Smallest k with P(X >= k) <= alpha/2 under Binomial(n, 1/2); k = n + 1
// when even k = n is not significant.
inline int binomial_upper_threshold(int n, double alpha) {
  double tail = 0.0;
  // log C(n, i) accumulated downward from i = n
  for (int k = n; k >= 0; --k) {
    double log_c = 0.0;
    for (int i = 0; i < n - k; ++i)
      log_c += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(i + 1));
    tail += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
    if (tail > alpha / 2.0) return k + 1;
  }
  return 0;
}

}  // namespace detail

/// Fixed-iteration Boruta: each round trains a forest on the real features
/// plus one shuffled shadow copy of every feature; a hit means the feature's
/// impurity importance beats the best shadow's.
inline BorutaResult boruta_importance(const Matrix& x, const std::vector<int>& y, int n_iter = 20,
                                      double alpha = 0.01, std::uint64_t seed = 1,
                                      const ForestConfig& forest_cfg = {}) {
  detail::check_binary_labels(x, y);
  if (n_iter < 0) throw ConfigError("boruta n_iter must be >= 0");
  if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("boruta alpha must be in (0, 1)");
  const std::size_t n = x.rows, d = x.cols;

  BorutaResult res;
  res.n_iter = n_iter;
  res.hits.assign(d, 0);
  res.hit_threshold = detail::binomial_upper_threshold(n_iter, alpha);
  res.miss_threshold = n_iter - res.hit_threshold;

  Matrix aug(n, 2 * d);
  std::vector<std::size_t> perm(n);
  for (int it = 0; it < n_iter; ++it) {
    Rng rng(mix_seed(seed, 0xb0 + static_cast<std::uint64_t>(it)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) aug.at(i, j) = x.at(i, j);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      rng.shuffle(perm);
      for (std::size_t i = 0; i < n; ++i) aug.at(i, d + j) = x.at(perm[i], j);
    }
    ForestConfig fc = forest_cfg;
    fc.seed = mix_seed(seed, 0x5eed + static_cast<std::uint64_t>(it));
    const Forest forest = train_random_forest(aug, y, fc);
    double max_shadow = 0.0;
    for (std::size_t j = d; j < 2 * d; ++j)
      max_shadow = std::max(max_shadow, forest.importance[j]);
    for (std::size_t j = 0; j < d; ++j)
      if (forest.importance[j] > max_shadow) ++res.hits[j];
  }

  for (std::size_t j = 0; j < d; ++j) {
    if (n_iter > 0 && res.hits[j] >= res.hit_threshold)
      res.confirmed.push_back(static_cast<int>(j));
    else if (n_iter > 0 && res.hits[j] <= res.miss_threshold)
      res.rejected.push_back(static_cast<int>(j));
    else
      res.tentative.push_back(static_cast<int>(j));
  }
  return res;
}

struct FeatureTest {
  std::string name;
  double mean_attention = 0.0;
  double mean_random = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool significant = false;  // p < threshold
};

/// Welch test per feature between attention and random rows of one split.
inline std::vector<FeatureTest> per_feature_t_tests(const SliceDataset& ds, Split split,
                                                    double threshold = 1e-4) {
  std::vector<std::vector<double>> attn(ds.feature_names.size()), rnd(ds.feature_names.size());
  for (const auto& row : ds.rows) {
    if (row.split != split) continue;
    auto& dst = row.kind_label ? attn : rnd;
    for (std::size_t j = 0; j < row.features.size(); ++j) dst[j].push_back(row.features[j]);
  }
  if (ds.feature_names.empty()) throw DataError("slice dataset has no features");
  if (attn[0].size() < 2 || rnd[0].size() < 2)
    throw DataError("need at least 2 attention and 2 random rows in the split");
  std::vector<FeatureTest> out;
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
    FeatureTest ft;
    ft.name = ds.feature_names[j];
    for (double v : attn[j]) ft.mean_attention += v;
    ft.mean_attention /= static_cast<double>(attn[j].size());
    for (double v : rnd[j]) ft.mean_random += v;
    ft.mean_random /= static_cast<double>(rnd[j].size());
    const WelchResult w = welch_t_test(attn[j], rnd[j]);
    ft.t = w.t;
    ft.p = w.p;
    ft.significant = w.p < threshold;
    out.push_back(std::move(ft));
  }
  return out;
}

}  // namespace attnslice

#endif  // ATTNSLICE_IMPORTANCE_HPP
