// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Random forest with Gini splits. Split search runs on per-feature quantile
// bin codes computed once per training call, so finding the best threshold
// at a node is a histogram pass instead of a sort. Trees are independent
// given (seed, tree index), which keeps parallel training deterministic.

#ifndef ATTNSLICE_FOREST_HPP
#define ATTNSLICE_FOREST_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/linear.hpp"
#include "attnslice/matrix.hpp"
#include "attnslice/parallel.hpp"
#include "attnslice/rng.hpp"

namespace attnslice {

struct ForestConfig {
  int n_trees = 200;
  int max_depth = 12;
  int min_leaf = 2;
  int mtry = 0;  // 0 selects ceil(sqrt(D))
  int n_bins = 64;
  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const {
    if (n_trees < 1) throw ConfigError("forest.n_trees must be >= 1");
    if (max_depth < 1) throw ConfigError("forest.max_depth must be >= 1");
    if (min_leaf < 1) throw ConfigError("forest.min_leaf must be >= 1");
    if (mtry < 0) throw ConfigError("forest.mtry must be >= 0");
    if (n_bins < 2 || n_bins > 256) throw ConfigError("forest.n_bins must be in [2, 256]");
    if (threads < 0) throw ConfigError("forest.threads must be >= 0");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double p1 = 0.0;  // leaf class-1 frequency
  int count = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<std::size_t> bootstrap;  // rows drawn for this tree

  double predict_proba(const double* x) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
      const TreeNode& nd = nodes[static_cast<std::size_t>(at)];
      at = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(at)].p1;
  }
};

struct Forest {
  int mtry = 0;
  std::vector<Tree> trees;
  Vec importance;             // mean impurity decrease per feature
  double oob_accuracy = 0.0;  // over rows left out by at least one tree
  std::size_t n_features = 0;

  double predict_proba_one(const double* x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict_proba(x);
    return s / static_cast<double>(trees.size());
  }

  Vec predict_proba(const Matrix& x) const {
    if (x.cols != n_features) throw DataError("feature width does not match the model");
    Vec out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_proba_one(x.row(i));
    return out;
  }
};

namespace detail {

struct BinTable {
  std::vector<std::uint8_t> codes;  // column-major n x D
  std::vector<Vec> thresholds;      // per feature, ascending
  std::size_t n = 0;

  std::uint8_t code(std::size_t row, std::size_t feat) const { return codes[feat * n + row]; }
};

inline BinTable bin_features(const Matrix& x, int n_bins) {
  BinTable bt;
  bt.n = x.rows;
  bt.codes.assign(x.rows * x.cols, 0);
  bt.thresholds.resize(x.cols);
  Vec col(x.rows);
  for (std::size_t j = 0; j < x.cols; ++j) {
    for (std::size_t i = 0; i < x.rows; ++i) col[i] = x.at(i, j);
    Vec sorted = col;
    std::sort(sorted.begin(), sorted.end());
    Vec& thr = bt.thresholds[j];
    for (int q = 1; q < n_bins; ++q) {
      const std::size_t pos = static_cast<std::size_t>(q) * x.rows / static_cast<std::size_t>(n_bins);
      const double v = sorted[std::min(pos, x.rows - 1)];
      if (thr.empty() || v > thr.back()) thr.push_back(v);
    }
    if (!thr.empty() && thr.back() >= sorted.back()) thr.pop_back();  // keep the top bin non-empty
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto it = std::lower_bound(thr.begin(), thr.end(), col[i]);
      bt.codes[j * bt.n + i] = static_cast<std::uint8_t>(it - thr.begin());
    }
  }
  return bt;
}

struct TreeBuilder {
  const BinTable& bins;
  const std::vector<int>& y;
  const ForestConfig& cfg;
  int mtry;
  Rng rng;
  std::vector<std::size_t> rows;  // working set, partitioned in place
  std::vector<TreeNode> nodes;
  Vec importance;
  std::vector<int> feat_pool;
  double n_root = 0.0;

  static double gini(double pos, double n) {
    if (n <= 0.0) return 0.0;
    const double p = pos / n;
    return 2.0 * p * (1.0 - p);
  }

  int build(std::size_t lo, std::size_t hi, int depth) {
    const std::size_t size = hi - lo;
    double pos = 0.0;
    for (std::size_t i = lo; i < hi; ++i) pos += y[rows[i]];
    const int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes.back().count = static_cast<int>(size);
    nodes.back().p1 = pos / static_cast<double>(size);
    if (depth >= cfg.max_depth || size < 2 * static_cast<std::size_t>(cfg.min_leaf) ||
        pos == 0.0 || pos == static_cast<double>(size))
      return self;

    // mtry features without replacement
    for (int m = 0; m < mtry; ++m) {
      const std::size_t swap_at =
          static_cast<std::size_t>(m) +
          rng.uniform_int(static_cast<std::uint64_t>(feat_pool.size() - static_cast<std::size_t>(m)));
      std::swap(feat_pool[static_cast<std::size_t>(m)], feat_pool[swap_at]);
    }

    const double g_parent = gini(pos, static_cast<double>(size));
    double best_score = g_parent;
    int best_feat = -1, best_bin = -1;
    double cnt[256], cpos[256];
    for (int m = 0; m < mtry; ++m) {
      const int f = feat_pool[static_cast<std::size_t>(m)];
      const Vec& thr = bins.thresholds[static_cast<std::size_t>(f)];
      if (thr.empty()) continue;
      const std::size_t nb = thr.size() + 1;
      std::fill(cnt, cnt + nb, 0.0);
      std::fill(cpos, cpos + nb, 0.0);
      for (std::size_t i = lo; i < hi; ++i) {
        const std::uint8_t b = bins.code(rows[i], static_cast<std::size_t>(f));
        cnt[b] += 1.0;
        cpos[b] += y[rows[i]];
      }
      double nl = 0.0, pl = 0.0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        nl += cnt[b];
        pl += cpos[b];
        const double nr = static_cast<double>(size) - nl;
        if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
        const double score =
            (nl * gini(pl, nl) + nr * gini(pos - pl, nr)) / static_cast<double>(size);
        if (score < best_score - 1e-12) {
          best_score = score;
          best_feat = f;
          best_bin = static_cast<int>(b);
        }
      }
    }
    if (best_feat < 0) return self;

    const auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(lo),
                                       rows.begin() + static_cast<std::ptrdiff_t>(hi),
                                       [&](std::size_t r) {
                                         return bins.code(r, static_cast<std::size_t>(best_feat)) <=
                                                static_cast<std::uint8_t>(best_bin);
                                       });
    const std::size_t mid = static_cast<std::size_t>(mid_it - rows.begin());
    importance[static_cast<std::size_t>(best_feat)] +=
        static_cast<double>(size) / n_root * (g_parent - best_score);

    nodes[static_cast<std::size_t>(self)].feature = best_feat;
    nodes[static_cast<std::size_t>(self)].threshold =
        bins.thresholds[static_cast<std::size_t>(best_feat)][static_cast<std::size_t>(best_bin)];
    const int l = build(lo, mid, depth + 1);
    nodes[static_cast<std::size_t>(self)].left = l;
    const int r = build(mid, hi, depth + 1);
    nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

}  // namespace detail

inline Forest train_random_forest(const Matrix& x, const std::vector<int>& y,
                                  const ForestConfig& cfg = {}) {
  cfg.validate();
  detail::check_binary_labels(x, y);
  const std::size_t n = x.rows, d = x.cols;

  Forest forest;
  forest.n_features = d;
  forest.mtry = cfg.mtry > 0 ? cfg.mtry
                             : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  forest.mtry = std::min<int>(forest.mtry, static_cast<int>(d));
  forest.trees.resize(static_cast<std::size_t>(cfg.n_trees));

  const detail::BinTable bins = detail::bin_features(x, cfg.n_bins);
  std::vector<Vec> tree_importance(static_cast<std::size_t>(cfg.n_trees));

  parallel_for(
      static_cast<std::size_t>(cfg.n_trees),
      [&](std::size_t t) {
        detail::TreeBuilder tb{bins, y, cfg, forest.mtry,
                               Rng(mix_seed(cfg.seed, 0xf0 + t)),
                               {}, {}, Vec(d, 0.0), {}, 0.0};
        tb.rows.resize(n);
        for (std::size_t i = 0; i < n; ++i)
          tb.rows[i] = tb.rng.uniform_int(static_cast<std::uint64_t>(n));
        tb.n_root = static_cast<double>(n);
        tb.feat_pool.resize(d);
        for (std::size_t j = 0; j < d; ++j) tb.feat_pool[j] = static_cast<int>(j);
        forest.trees[t].bootstrap = tb.rows;  // pre-partition order
        tb.build(0, n, 0);
        forest.trees[t].nodes = std::move(tb.nodes);
        tree_importance[t] = std::move(tb.importance);
      },
      static_cast<unsigned>(cfg.threads));

  forest.importance.assign(d, 0.0);
  for (const Vec& imp : tree_importance)
    for (std::size_t j = 0; j < d; ++j) forest.importance[j] += imp[j];
  for (std::size_t j = 0; j < d; ++j) forest.importance[j] /= static_cast<double>(cfg.n_trees);

  // Out-of-bag accuracy: average tree probabilities over trees that never
  // saw the row, threshold at 0.5.
  std::vector<char> in_bag(n);
  Vec oob_sum(n, 0.0);
  std::vector<int> oob_cnt(n, 0);
  for (const Tree& t : forest.trees) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (std::size_t r : t.bootstrap) in_bag[r] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      oob_sum[i] += t.predict_proba(x.row(i));
      ++oob_cnt[i];
    }
  }
  std::size_t covered = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (oob_cnt[i] == 0) continue;
    ++covered;
    const int pred = oob_sum[i] / oob_cnt[i] >= 0.5 ? 1 : 0;
    if (pred == y[i]) ++correct;
  }
  forest.oob_accuracy = covered ? static_cast<double>(correct) / static_cast<double>(covered) : 0.0;
  return forest;
}

}  // namespace attnslice

#endif  // ATTNSLICE_FOREST_HPP
