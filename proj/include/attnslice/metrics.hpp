// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ATTNSLICE_METRICS_HPP
#define ATTNSLICE_METRICS_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "attnslice/common.hpp"

namespace attnslice {

struct F1Report {
  double f1_pos = 0.0;
  double f1_neg = 0.0;
  double mean_f1 = 0.0;
  double accuracy = 0.0;
  int tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Per-class F1 with the 0-when-undefined convention, plus their mean.
inline F1Report f1_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) throw DataError("label/prediction length mismatch");
  if (y_true.empty()) throw DataError("cannot score an empty label set");
  F1Report r;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] != 0;
    const bool p = y_pred[i] != 0;
    if (t && p)
      ++r.tp;
    else if (!t && p)
      ++r.fp;
    else if (t && !p)
      ++r.fn;
    else
      ++r.tn;
  }
  const auto f1 = [](int tp, int fp, int fn) {
    const int denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * tp / denom;
  };
  r.f1_pos = f1(r.tp, r.fp, r.fn);
  r.f1_neg = f1(r.tn, r.fn, r.fp);
  r.mean_f1 = 0.5 * (r.f1_pos + r.f1_neg);
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(y_true.size());
  return r;
}

inline std::vector<int> threshold_predictions(const std::vector<double>& scores,
                                              double threshold = 0.5) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
  return out;
}

/// ROC AUC via average ranks; ties contribute one half, matching the
/// pair-counting definition.
inline double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
  if (y_true.size() != scores.size()) throw DataError("label/score length mismatch");
  const std::size_t n = y_true.size();
  std::size_t n_pos = 0;
  for (int y : y_true) n_pos += y != 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("AUC needs both classes present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (y_true[order[k]] != 0) rank_sum_pos += avg_rank;
    i = j;
  }
  return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace attnslice

#endif  // ATTNSLICE_METRICS_HPP
