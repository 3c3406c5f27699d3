// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Slice featurization (mean and signed gradient means over z-normalized
// channels), duration-matched random slice sampling away from the attention
// mass, and the paired slice dataset with its CSV form.

#ifndef ATTNSLICE_SLICES_HPP
#define ATTNSLICE_SLICES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/corpus.hpp"
#include "attnslice/parallel.hpp"
#include "attnslice/peaks.hpp"
#include "attnslice/train.hpp"

namespace attnslice {

/// Per-channel z-normalization over the whole answer with the population
/// standard deviation; near-constant channels become all zeros.
inline Matrix znormalize(const Matrix& frames) {
  if (frames.rows < 1) throw DataError("cannot z-normalize an empty answer");
  Matrix out(frames.rows, frames.cols);
  const double n = static_cast<double>(frames.rows);
  for (std::size_t c = 0; c < frames.cols; ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < frames.rows; ++t) mean += frames.at(t, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t t = 0; t < frames.rows; ++t) {
      const double d = frames.at(t, c) - mean;
      var += d * d;
    }
    const double std = std::sqrt(var / n);
    if (std < 1e-8) continue;  // column stays zero
    for (std::size_t t = 0; t < frames.rows; ++t) out.at(t, c) = (frames.at(t, c) - mean) / std;
  }
  return out;
}

/// Feature names in row order: <channel>_mean, _up, _down per channel.
inline std::vector<std::string> slice_feature_names(const ChannelSchema& schema) {
  std::vector<std::string> out;
  out.reserve(3 * schema.size());
  for (const auto& name : schema.names) {
    out.push_back(name + "_mean");
    out.push_back(name + "_up");
    out.push_back(name + "_down");
  }
  return out;
}

/// Per channel over the slice rows: mean value, mean of positive one-step
/// gradients (0 if none), mean of negative ones (0 if none). Gradients use
/// only frames inside the slice.
inline std::vector<double> featurize_slice(const Matrix& znormed, const Slice& s) {
  if (s.start_idx < 0 || s.end_idx < s.start_idx ||
      s.end_idx >= static_cast<int>(znormed.rows))
    throw DataError("slice out of bounds for featurization");
  const std::size_t lo = static_cast<std::size_t>(s.start_idx);
  const std::size_t hi = static_cast<std::size_t>(s.end_idx);
  std::vector<double> out;
  out.reserve(3 * znormed.cols);
  for (std::size_t c = 0; c < znormed.cols; ++c) {
    double mean = 0.0;
    for (std::size_t t = lo; t <= hi; ++t) mean += znormed.at(t, c);
    mean /= static_cast<double>(hi - lo + 1);
    double pos = 0.0, neg = 0.0;
    int n_pos = 0, n_neg = 0;
    for (std::size_t t = lo; t < hi; ++t) {
      const double g = znormed.at(t + 1, c) - znormed.at(t, c);
      if (g > 0) {
        pos += g;
        ++n_pos;
      } else if (g < 0) {
        neg += g;
        ++n_neg;
      }
    }
    out.push_back(mean);
    out.push_back(n_pos ? pos / n_pos : 0.0);
    out.push_back(n_neg ? neg / n_neg : 0.0);
  }
  return out;
}

/// k random slices of the principal slice's duration. Start indices are
/// drawn with weight 1 - attention; draws overlapping the principal by more
/// than half its length are rejected up to 50 retries each.
inline std::vector<Slice> sample_random_slices(const Vec& curve, const Slice& principal, int k,
                                               Rng& rng) {
  const int T = static_cast<int>(curve.size());
  const int L = principal.length();
  if (T < L) throw DataError("answer too short to host a window of the principal's length");
  std::vector<double> weights(static_cast<std::size_t>(T - L + 1));
  double total = 0.0;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    weights[s] = std::max(0.0, 1.0 - curve[s]);
    total += weights[s];
  }
  if (total <= 0.0) weights.assign(weights.size(), 1.0);  // degenerate curve
  const Vec cdf = cumulative(weights);

  std::vector<Slice> out;
  for (int i = 0; i < k; ++i) {
    int start = 0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      start = static_cast<int>(rng.categorical(cdf));
      const int inter = std::max(
          0, std::min(start + L - 1, principal.end_idx) - std::max(start, principal.start_idx) + 1);
      if (2 * inter <= L) break;
    }
    Slice s;
    s.answer_id = principal.answer_id;
    s.kind = SliceKind::random;
    s.start_idx = start;
    s.end_idx = start + L - 1;
    s.amplitude = 0.0;
    for (int t = s.start_idx; t <= s.end_idx; ++t)
      s.amplitude = std::max(s.amplitude, curve[static_cast<std::size_t>(t)]);
    out.push_back(std::move(s));
  }
  return out;
}

struct SliceRow {
  std::string answer_id;
  Split split = Split::train;
  int kind_label = 0;  // 1 = attention slice, 0 = random slice
  int hirability_label = 0;
  Slice slice;
  std::vector<double> features;
};

struct SliceDataset {
  std::vector<std::string> feature_names;
  std::vector<SliceRow> rows;
  int skipped_answers = 0;  // answers with no distinguishable peaks

  std::vector<const SliceRow*> rows_in(Split s) const {
    std::vector<const SliceRow*> out;
    for (const auto& r : rows)
      if (r.split == s) out.push_back(&r);
    return out;
  }
};

/// Builds the paired dataset: per answer with a principal slice, one
/// attention row and k_random duration-matched random rows, all carrying the
/// answer's hirability label and split. Rows are ordered by answer_id with
/// the attention row first. The profile provider must be pure; it is called
/// from worker threads.
template <typename ProfileFn>
SliceDataset build_slice_dataset(const Corpus& corpus, ProfileFn&& profile_of,
                                 const PeakConfig& peak_cfg, std::uint64_t seed,
                                 int k_random = 4, int threads = 0) {
  peak_cfg.validate();
  if (k_random < 0) throw ConfigError("slices.k_random must be >= 0");
  SliceDataset ds;
  ds.feature_names = slice_feature_names(corpus.schema);

  std::vector<std::vector<SliceRow>> per_answer(corpus.answers.size());
  std::vector<char> skipped(corpus.answers.size(), 0);
  parallel_for(
      corpus.answers.size(),
      [&](std::size_t i) {
        const Answer& a = corpus.answers[i];
        const Vec profile = profile_of(a);
        const auto slices = extract_slices_for_answer(profile, a.answer_id, peak_cfg);
        const auto principal = principal_slice(slices);
        if (!principal) {
          skipped[i] = 1;
          return;
        }
        const Matrix z = znormalize(a.frames);
        const Split split = corpus.split_of(a.answer_id);

        SliceRow attn;
        attn.answer_id = a.answer_id;
        attn.split = split;
        attn.kind_label = 1;
        attn.hirability_label = a.label;
        attn.slice = *principal;
        attn.features = featurize_slice(z, *principal);
        per_answer[i].push_back(std::move(attn));

        Rng rng(mix_seed(seed, hash_string(a.answer_id)));
        for (const Slice& r : sample_random_slices(profile, *principal, k_random, rng)) {
          SliceRow row;
          row.answer_id = a.answer_id;
          row.split = split;
          row.kind_label = 0;
          row.hirability_label = a.label;
          row.slice = r;
          row.features = featurize_slice(z, r);
          per_answer[i].push_back(std::move(row));
        }
      },
      static_cast<unsigned>(std::max(0, threads)));

  std::vector<std::size_t> order(corpus.answers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.answers[a].answer_id < corpus.answers[b].answer_id;
  });
  for (std::size_t i : order) {
    ds.skipped_answers += skipped[i];
    for (auto& row : per_answer[i]) ds.rows.push_back(std::move(row));
  }
  return ds;
}

inline SliceDataset build_slice_dataset(const Corpus& corpus, const Ensemble& ensemble,
                                        const PeakConfig& peak_cfg, std::uint64_t seed,
                                        int k_random = 4, int threads = 0) {
  return build_slice_dataset(
      corpus, [&](const Answer& a) { return attention_profile(ensemble, a.frames); }, peak_cfg,
      seed, k_random, threads);
}

// ---------------------------------------------------------------------------
// CSV form: 3C feature columns, then kind_label, hirability_label, answer_id,
// split, start_idx, end_idx, amplitude.

inline void save_slice_dataset(const SliceDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (const auto& name : ds.feature_names) out << name << ',';
  out << "kind_label,hirability_label,answer_id,split,start_idx,end_idx,amplitude\n";
  for (const auto& r : ds.rows) {
    if (r.features.size() != ds.feature_names.size())
      throw DataError("slice row width does not match the feature names");
    for (double v : r.features) out << format_double(v) << ',';
    out << r.kind_label << ',' << r.hirability_label << ',' << r.answer_id << ','
        << to_string(r.split) << ',' << r.slice.start_idx << ',' << r.slice.end_idx << ','
        << format_double(r.slice.amplitude) << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline SliceDataset load_slice_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open slice dataset '" + path + "'");
  SliceDataset ds;
  std::string line;
  if (!std::getline(in, line)) throw DataError("slice dataset '" + path + "' is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 8) throw DataError("slice dataset header too short");
  const std::size_t n_features = header.size() - 7;
  ds.feature_names.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(n_features));

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    SliceRow r;
    r.features.reserve(n_features);
    for (std::size_t i = 0; i < n_features; ++i)
      r.features.push_back(parse_double(cells[i], where + " feature " + header[i]));
    r.kind_label = static_cast<int>(parse_double(cells[n_features], where + " kind_label"));
    r.hirability_label =
        static_cast<int>(parse_double(cells[n_features + 1], where + " hirability_label"));
    r.answer_id = cells[n_features + 2];
    const auto split = split_from_string(cells[n_features + 3]);
    if (!split) throw DataError(where + ": unknown split '" + cells[n_features + 3] + "'");
    r.split = *split;
    r.slice.answer_id = r.answer_id;
    r.slice.kind = r.kind_label ? SliceKind::attention : SliceKind::random;
    r.slice.start_idx = static_cast<int>(parse_double(cells[n_features + 4], where + " start_idx"));
    r.slice.end_idx = static_cast<int>(parse_double(cells[n_features + 5], where + " end_idx"));
    r.slice.amplitude = parse_double(cells[n_features + 6], where + " amplitude");
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

/// Design matrix and label vectors for one split of the dataset.
struct SliceMatrix {
  Matrix x;
  std::vector<int> kind;
  std::vector<int> hirability;
  std::vector<std::string> answer_ids;
};

inline SliceMatrix slice_matrix(const SliceDataset& ds, Split split) {
  const auto rows = ds.rows_in(split);
  SliceMatrix out;
  out.x = Matrix(rows.size(), ds.feature_names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]->features.size() != ds.feature_names.size())
      throw DataError("slice row width does not match the feature names");
    std::copy(rows[i]->features.begin(), rows[i]->features.end(), out.x.row(i));
    out.kind.push_back(rows[i]->kind_label);
    out.hirability.push_back(rows[i]->hirability_label);
    out.answer_ids.push_back(rows[i]->answer_id);
  }
  return out;
}

}  // namespace attnslice

#endif  // ATTNSLICE_SLICES_HPP
