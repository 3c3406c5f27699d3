// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// High-attention slice extraction: draw timesteps in proportion to the
// attention curve, cluster the draws with 1-D DBSCAN, and report each
// cluster's extent as a slice.

#ifndef ATTNSLICE_PEAKS_HPP
#define ATTNSLICE_PEAKS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/corpus.hpp"
#include "attnslice/matrix.hpp"
#include "attnslice/rng.hpp"
#include "attnslice/train.hpp"

namespace attnslice {

struct PeakConfig {
  int n_draws = 2048;
  double eps = 2.0;           // neighborhood radius in frame indices
  double min_pts_scale = 3.0; // density multiplier over a uniform curve
  int min_pts_abs = 0;        // > 0 pins min_pts to an absolute count
  int min_slice_len = 2;      // frames; shorter slices are dropped
  std::uint64_t seed = 1234;

  void validate() const {
    if (n_draws < 100) throw ConfigError("peaks.n_draws must be >= 100");
    if (eps < 1) throw ConfigError("peaks.eps must be >= 1");
    if (min_pts_abs <= 0 && min_pts_scale <= 1)
      throw ConfigError("peaks.min_pts_scale must exceed 1 to reject flat curves");
    if (min_slice_len < 1) throw ConfigError("peaks.min_slice_len must be >= 1");
  }

  /// Core threshold for a curve of length T. A uniform curve is expected to
  /// put (2*eps+1) * n_draws / T draws in any eps-neighborhood; a core point
  /// must see min_pts_scale times that density.
  int resolved_min_pts(std::size_t T) const {
    if (min_pts_abs > 0) return min_pts_abs;
    const double uniform_neighborhood =
        (2.0 * eps + 1.0) * static_cast<double>(n_draws) / static_cast<double>(T);
    return static_cast<int>(std::ceil(min_pts_scale * uniform_neighborhood));
  }
};

enum class SliceKind { attention, random };

inline const char* to_string(SliceKind k) {
  return k == SliceKind::attention ? "attention" : "random";
}

/// Closed frame interval plus the peak attention value inside it.
struct Slice {
  std::string answer_id;
  SliceKind kind = SliceKind::attention;
  int start_idx = 0;
  int end_idx = 0;
  double amplitude = 0.0;

  int length() const { return end_idx - start_idx + 1; }
  double duration_s() const { return static_cast<double>(length()) * 0.25; }
};

inline void check_curve(const Vec& curve) {
  if (curve.empty()) throw DataError("attention curve is empty");
  double total = 0.0;
  for (double v : curve) {
    if (!std::isfinite(v) || v < 0) throw DataError("attention curve must be finite and >= 0");
    total += v;
  }
  if (total <= 0) throw DataError("attention curve has no mass");
}

/// n_draws i.i.d. draws from the categorical distribution the curve defines,
/// returned sorted.
inline std::vector<int> sample_timesteps(const Vec& curve, int n_draws, Rng& rng) {
  check_curve(curve);
  const Vec cdf = cumulative(curve);
  std::vector<int> out(static_cast<std::size_t>(n_draws));
  for (auto& v : out) v = static_cast<int>(rng.categorical(cdf));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<int> sample_timesteps(const Vec& curve, int n_draws, std::uint64_t seed) {
  Rng rng(seed);
  return sample_timesteps(curve, n_draws, rng);
}

struct DbscanResult {
  std::vector<std::vector<int>> clusters;  // unique member values, sorted
  std::vector<int> noise;                  // unique values in no cluster, sorted
};

/// 1-D DBSCAN over a sorted integer multiset. A value is core when the draws
/// within eps of it (itself included) number at least min_pts. Core values
/// chain into clusters when their gap is at most eps; border values join the
/// cluster of the nearest core, preferring the left one on ties.
inline DbscanResult dbscan_1d(const std::vector<int>& sorted_points, double eps, int min_pts) {
  if (eps < 1) throw ConfigError("dbscan eps must be >= 1");
  if (min_pts < 1) throw ConfigError("dbscan min_pts must be >= 1");
  DbscanResult result;
  if (sorted_points.empty()) return result;

  std::vector<int> values;   // unique, ascending
  std::vector<long> counts;  // multiplicity per value
  for (int p : sorted_points) {
    if (values.empty() || values.back() != p) {
      values.push_back(p);
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }

  // Multiplicity within [v - eps, v + eps] via a sliding window.
  const std::size_t k = values.size();
  std::vector<long> neigh(k, 0);
  std::size_t lo = 0, hi = 0;
  long window = 0;
  for (std::size_t i = 0; i < k; ++i) {
    while (hi < k && values[hi] <= values[i] + eps) window += counts[hi++];
    while (values[lo] < values[i] - eps) window -= counts[lo++];
    neigh[i] = window;
  }

  std::vector<bool> core(k);
  for (std::size_t i = 0; i < k; ++i) core[i] = neigh[i] >= min_pts;

  // Chain consecutive core values; record each value's cluster id.
  std::vector<int> cluster_of(k, -1);
  int n_clusters = 0;
  int prev_core = -1;
  for (std::size_t i = 0; i < k; ++i) {
    if (!core[i]) continue;
    if (prev_core >= 0 && values[i] - values[static_cast<std::size_t>(prev_core)] <= eps)
      cluster_of[i] = cluster_of[static_cast<std::size_t>(prev_core)];
    else
      cluster_of[i] = n_clusters++;
    prev_core = static_cast<int>(i);
  }

  // Border values adopt the nearest core's cluster.
  std::vector<std::size_t> core_idx;
  for (std::size_t i = 0; i < k; ++i)
    if (core[i]) core_idx.push_back(i);
  for (std::size_t i = 0; i < k; ++i) {
    if (core[i] || core_idx.empty()) continue;
    const auto it = std::lower_bound(core_idx.begin(), core_idx.end(), i);
    double best = 0.0;
    std::size_t chosen = k;
    if (it != core_idx.begin()) {
      const std::size_t c = *(it - 1);
      best = static_cast<double>(values[i] - values[c]);
      chosen = c;
    }
    if (it != core_idx.end()) {
      const std::size_t c = *it;
      const double d = static_cast<double>(values[c] - values[i]);
      if (chosen == k || d < best) {
        best = d;
        chosen = c;
      }
    }
    if (chosen != k && best <= eps) cluster_of[i] = cluster_of[chosen];
  }

  result.clusters.assign(static_cast<std::size_t>(n_clusters), {});
  for (std::size_t i = 0; i < k; ++i) {
    if (cluster_of[i] >= 0)
      result.clusters[static_cast<std::size_t>(cluster_of[i])].push_back(values[i]);
    else
      result.noise.push_back(values[i]);
  }
  return result;
}

/// Sample, cluster, and convert each cluster's extent into a slice. Returns
/// slices ordered by start index; an empty list means the curve has no
/// distinguishable peaks.
inline std::vector<Slice> extract_slices(const Vec& curve, const PeakConfig& cfg) {
  cfg.validate();
  check_curve(curve);
  Rng rng(cfg.seed);
  const std::vector<int> draws = sample_timesteps(curve, cfg.n_draws, rng);
  const DbscanResult db = dbscan_1d(draws, cfg.eps, cfg.resolved_min_pts(curve.size()));

  std::vector<Slice> out;
  for (const auto& cluster : db.clusters) {
    Slice s;
    s.kind = SliceKind::attention;
    s.start_idx = cluster.front();
    s.end_idx = cluster.back();
    if (s.length() < cfg.min_slice_len) continue;
    s.amplitude = 0.0;
    for (int t = s.start_idx; t <= s.end_idx; ++t)
      s.amplitude = std::max(s.amplitude, curve[static_cast<std::size_t>(t)]);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const Slice& a, const Slice& b) { return a.start_idx < b.start_idx; });
  return out;
}

/// The slice holding the highest peak; ties break toward the earliest start.
inline std::optional<Slice> principal_slice(const std::vector<Slice>& slices) {
  std::optional<Slice> best;
  for (const auto& s : slices) {
    if (!best || s.amplitude > best->amplitude ||
        (s.amplitude == best->amplitude && s.start_idx < best->start_idx))
      best = s;
  }
  return best;
}

/// Per-answer extraction with a seed derived from the answer id, so corpus
/// runs are reproducible answer by answer and order-independent.
inline std::vector<Slice> extract_slices_for_answer(const Vec& curve,
                                                    const std::string& answer_id,
                                                    const PeakConfig& cfg) {
  PeakConfig local = cfg;
  local.seed = mix_seed(cfg.seed, hash_string(answer_id));
  std::vector<Slice> slices = extract_slices(curve, local);
  for (auto& s : slices) s.answer_id = answer_id;
  return slices;
}

inline std::vector<Slice> extract_slices_for_answer(const Ensemble& ensemble, const Answer& a,
                                                    const PeakConfig& cfg) {
  return extract_slices_for_answer(attention_profile(ensemble, a.frames), a.answer_id, cfg);
}

}  // namespace attnslice

#endif  // ATTNSLICE_PEAKS_HPP
