// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data model for labeled multi-channel behavioral sequences, a deterministic
// synthetic generator that plants ground-truth salient events, and the
// line-delimited corpus file format.

#ifndef ATTNSLICE_CORPUS_HPP
#define ATTNSLICE_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "attnslice/common.hpp"
#include "attnslice/matrix.hpp"
#include "attnslice/rng.hpp"

namespace attnslice {

enum class ChannelGroup { lower_face, upper_face, blink_gaze, head_pose, confidence };

inline const char* to_string(ChannelGroup g) {
  switch (g) {
    case ChannelGroup::lower_face: return "lower_face";
    case ChannelGroup::upper_face: return "upper_face";
    case ChannelGroup::blink_gaze: return "blink_gaze";
    case ChannelGroup::head_pose: return "head_pose";
    case ChannelGroup::confidence: return "confidence";
  }
  return "?";
}

/// Group assignment is derived from the channel name so that a corpus file
/// only needs to carry the ordered name list.
inline ChannelGroup channel_group_for(const std::string& name) {
  if (name == "confidence") return ChannelGroup::confidence;
  if (name.rfind("gaze_", 0) == 0 || name.rfind("AU45", 0) == 0) return ChannelGroup::blink_gaze;
  if (name.size() == 2 && (name[0] == 'T' || name[0] == 'R')) return ChannelGroup::head_pose;
  if (name.rfind("AU", 0) == 0) {
    const int au = std::stoi(name.substr(2));
    // Action units at or above 9 act on the lower half of the face.
    return au >= 9 ? ChannelGroup::lower_face : ChannelGroup::upper_face;
  }
  throw DataError("channel '" + name + "' does not map to a known group");
}

struct ChannelSchema {
  std::vector<std::string> names;
  std::vector<ChannelGroup> groups;

  std::size_t size() const { return names.size(); }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }

  void validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& n : names)
      if (!seen.insert(n).second) throw DataError("duplicate channel name '" + n + "'");
    if (groups.size() != names.size()) throw DataError("channel group list out of sync");
  }

  static ChannelSchema from_names(std::vector<std::string> names) {
    ChannelSchema s;
    s.names = std::move(names);
    s.groups.reserve(s.names.size());
    for (const auto& n : s.names) s.groups.push_back(channel_group_for(n));
    s.validate();
    return s;
  }

  /// 32-channel layout used by the synthetic generator: 17 action-unit
  /// intensities, 6 action-unit presences, 2 gaze angles, 6 head-pose
  /// coordinates, and the tracker confidence.
  static ChannelSchema standard() {
    return from_names({
        "AU01_r", "AU02_r", "AU04_r", "AU05_r", "AU06_r", "AU07_r", "AU09_r",
        "AU10_r", "AU12_r", "AU14_r", "AU15_r", "AU17_r", "AU20_r", "AU23_r",
        "AU25_r", "AU26_r", "AU45_r",
        "AU04_c", "AU12_c", "AU23_c", "AU25_c", "AU26_c", "AU45_c",
        "gaze_angle_x", "gaze_angle_y",
        "Tx", "Ty", "Tz", "Rx", "Ry", "Rz",
        "confidence",
    });
  }
};

/// Closed frame interval [start_idx, end_idx] a synthetic event occupies.
struct PlantedEvent {
  int start_idx = 0;
  int end_idx = 0;
  std::string kind;

  int length() const { return end_idx - start_idx + 1; }
};

/// One candidate response: a T x C frame matrix at a fixed 4 Hz hop plus a
/// binary label. `events` carries synthetic ground truth only.
struct Answer {
  std::string answer_id;
  std::string candidate_id;
  int label = 0;
  Matrix frames;  // T x C
  std::vector<PlantedEvent> events;

  int num_frames() const { return static_cast<int>(frames.rows); }
};

enum class Split { train, validation, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

inline std::optional<Split> split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  return std::nullopt;
}

struct Corpus {
  ChannelSchema schema;
  std::vector<Answer> answers;
  std::unordered_map<std::string, Split> split;

  Split split_of(const std::string& answer_id) const {
    auto it = split.find(answer_id);
    if (it == split.end()) throw DataError("answer '" + answer_id + "' has no split assignment");
    return it->second;
  }

  std::vector<const Answer*> answers_in(Split s) const {
    std::vector<const Answer*> out;
    for (const auto& a : answers)
      if (split_of(a.answer_id) == s) out.push_back(&a);
    return out;
  }

  const Answer* find(const std::string& answer_id) const {
    for (const auto& a : answers)
      if (a.answer_id == answer_id) return &a;
    return nullptr;
  }

  /// Structural invariants: consistent dims, finite values, disjoint and
  /// exhaustive splits, no candidate straddling two splits.
  void validate() const {
    schema.validate();
    std::unordered_map<std::string, Split> candidate_split;
    for (const auto& a : answers) {
      if (a.num_frames() < 4)
        throw DataError("answer '" + a.answer_id + "' has fewer than 4 frames");
      if (a.frames.cols != schema.size())
        throw DataError("answer '" + a.answer_id + "' channel count mismatch");
      for (double v : a.frames.a)
        if (!std::isfinite(v)) throw DataError("answer '" + a.answer_id + "' contains non-finite values");
      if (a.label != 0 && a.label != 1)
        throw DataError("answer '" + a.answer_id + "' label must be 0 or 1");
      for (const auto& e : a.events)
        if (e.start_idx < 0 || e.end_idx < e.start_idx || e.end_idx >= a.num_frames())
          throw DataError("answer '" + a.answer_id + "' planted event out of range");
      const Split s = split_of(a.answer_id);
      auto [it, inserted] = candidate_split.emplace(a.candidate_id, s);
      if (!inserted && it->second != s)
        throw DataError("candidate '" + a.candidate_id + "' appears in two splits");
    }
  }
};

/// One synthetic event kind: which channels it shifts and by how much, and
/// whether its presence makes the answer label-positive.
struct EventSpec {
  std::string kind;
  std::vector<std::pair<std::string, double>> channel_offsets;
  bool positive = false;
};

inline std::vector<EventSpec> default_event_specs() {
  return {
      {"anxiety", {{"AU20_r", 2.86}, {"AU23_r", 2.86}}, true},
      {"pause", {{"AU26_r", -2.86}, {"AU45_c", 2.86}}, true},
      {"smile", {{"AU12_r", 1.6}, {"AU06_r", 1.2}}, false},
      {"head_move", {{"Tz", 1.6}, {"Rx", 1.2}}, false},
  };
}

struct GeneratorConfig {
  int n_answers = 2000;
  int t_min = 200;         // frames at 4 Hz
  int t_max = 360;
  double event_rate = 0.7;
  int event_len_min = 6;
  int event_len_max = 12;
  std::vector<EventSpec> events = default_event_specs();
  double label_noise = 0.15;
  double position_bias = 0.9;  // chance an event is pinned to the start or end
  double noise_sigma = 1.0;    // stationary std of the baseline AR(1) noise
  double noise_rho = 0.8;      // AR(1) smoothing coefficient
  std::uint64_t seed = 42;

  void validate() const {
    if (n_answers < 0) throw ConfigError("generator.n_answers must be >= 0");
    if (t_min < 4 || t_max < t_min) throw ConfigError("generator.t_range invalid: need 4 <= min <= max");
    if (event_rate < 0 || event_rate > 1) throw ConfigError("generator.event_rate must be in [0,1]");
    if (event_len_min < 1 || event_len_max < event_len_min)
      throw ConfigError("generator.event_len_range invalid: need 1 <= min <= max");
    if (label_noise < 0 || label_noise > 1) throw ConfigError("generator.label_noise must be in [0,1]");
    if (position_bias < 0 || position_bias > 1) throw ConfigError("generator.position_bias must be in [0,1]");
    if (noise_sigma <= 0) throw ConfigError("generator.noise_sigma must be > 0");
    if (noise_rho < 0 || noise_rho >= 1) throw ConfigError("generator.noise_rho must be in [0,1)");
    if (events.empty() && event_rate > 0) throw ConfigError("generator.events empty but event_rate > 0");
  }

  std::vector<std::string> positive_kinds() const {
    std::vector<std::string> out;
    for (const auto& e : events)
      if (e.positive) out.push_back(e.kind);
    return out;
  }
};

namespace detail {

inline std::string zero_pad(int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

}  // namespace detail

/// Deterministic synthetic corpus. Baseline frames are smooth AR(1) noise per
/// channel; at most one event per answer adds a constant offset burst to its
/// mapped channels. The label is "event present and kind is positive",
/// flipped with probability label_noise.
inline Corpus generate_corpus(const GeneratorConfig& cfg) {
  cfg.validate();
  Corpus corpus;
  corpus.schema = ChannelSchema::standard();
  const std::size_t C = corpus.schema.size();

  Rng root(cfg.seed);

  // Candidates own 1..2 answers each; splits are assigned per candidate.
  Rng structure = root.substream(0);
  std::vector<std::pair<std::string, int>> candidates;  // (candidate_id, answer count)
  int assigned = 0;
  while (assigned < cfg.n_answers) {
    int take = structure.bernoulli(0.3) ? 2 : 1;
    take = std::min(take, cfg.n_answers - assigned);
    candidates.emplace_back(detail::zero_pad(static_cast<int>(candidates.size()), 5), take);
    assigned += take;
  }
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  structure.shuffle(order);

  std::vector<Split> candidate_split(candidates.size(), Split::train);
  const std::size_t n_train = static_cast<std::size_t>(0.8 * static_cast<double>(order.size()));
  const std::size_t n_val = static_cast<std::size_t>(0.1 * static_cast<double>(order.size()));
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    Split s = Split::train;
    if (pos >= n_train + n_val)
      s = Split::test;
    else if (pos >= n_train)
      s = Split::validation;
    candidate_split[order[pos]] = s;
  }

  // Per-answer content comes from a dedicated substream so the corpus is
  // reproducible answer-by-answer.
  int answer_counter = 0;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    for (int rep = 0; rep < candidates[ci].second; ++rep) {
      Answer ans;
      ans.answer_id = "a" + detail::zero_pad(answer_counter, 5);
      ans.candidate_id = "c" + candidates[ci].first;
      Rng rng = root.substream(1000 + static_cast<std::uint64_t>(answer_counter));
      ++answer_counter;

      const int T = static_cast<int>(rng.uniform_int(cfg.t_min, cfg.t_max));
      ans.frames = Matrix(static_cast<std::size_t>(T), C);
      for (std::size_t c = 0; c < C; ++c) {
        double x = cfg.noise_sigma * rng.normal();
        const double drive = cfg.noise_sigma * std::sqrt(1.0 - cfg.noise_rho * cfg.noise_rho);
        for (int t = 0; t < T; ++t) {
          ans.frames.at(static_cast<std::size_t>(t), c) = x;
          x = cfg.noise_rho * x + drive * rng.normal();
        }
      }

      bool positive_event = false;
      if (rng.bernoulli(cfg.event_rate)) {
        const EventSpec& spec = cfg.events[rng.uniform_int(cfg.events.size())];
        const int len = static_cast<int>(
            rng.uniform_int(std::min(cfg.event_len_min, T), std::min(cfg.event_len_max, T)));
        int start;
        if (rng.bernoulli(cfg.position_bias)) {
          const int jitter = static_cast<int>(rng.uniform_int(0, std::min(3, T - len)));
          start = rng.bernoulli(0.5) ? jitter : T - len - jitter;
        } else {
          start = static_cast<int>(rng.uniform_int(0, T - len));
        }
        for (const auto& [name, offset] : spec.channel_offsets) {
          const int c = corpus.schema.index_of(name);
          if (c < 0) throw ConfigError("generator.events references unknown channel '" + name + "'");
          for (int t = start; t < start + len; ++t)
            ans.frames.at(static_cast<std::size_t>(t), static_cast<std::size_t>(c)) += offset;
        }
        ans.events.push_back({start, start + len - 1, spec.kind});
        positive_event = spec.positive;
      }

      int label = positive_event ? 1 : 0;
      if (rng.bernoulli(cfg.label_noise)) label = 1 - label;
      ans.label = label;

      corpus.split[ans.answer_id] = candidate_split[ci];
      corpus.answers.push_back(std::move(ans));
    }
  }

  corpus.validate();
  return corpus;
}

// ---------------------------------------------------------------------------
// Corpus file format: line-delimited JSON, one record per answer. The channel
// list appears on the first record and may be repeated verbatim on others.

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  bool first = true;
  for (const auto& a : corpus.answers) {
    nlohmann::json rec;
    rec["answer_id"] = a.answer_id;
    rec["candidate_id"] = a.candidate_id;
    rec["label"] = a.label;
    rec["split"] = to_string(corpus.split_of(a.answer_id));
    if (first) {
      rec["channels"] = corpus.schema.names;
      first = false;
    }
    auto& frames = rec["frames"] = nlohmann::json::array();
    for (std::size_t t = 0; t < a.frames.rows; ++t) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < a.frames.cols; ++c) row.push_back(a.frames.at(t, c));
      frames.push_back(std::move(row));
    }
    if (!a.events.empty()) {
      auto& ev = rec["events"] = nlohmann::json::array();
      for (const auto& e : a.events) ev.push_back({e.start_idx, e.end_idx, e.kind});
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  Corpus corpus;
  std::string line;
  int line_no = 0;
  bool have_schema = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": invalid record: " + e.what());
    }
    try {
      if (rec.contains("channels")) {
        auto names = rec["channels"].get<std::vector<std::string>>();
        if (!have_schema) {
          corpus.schema = ChannelSchema::from_names(std::move(names));
          have_schema = true;
        } else if (names != corpus.schema.names) {
          throw DataError(where + ": channel list differs from first record");
        }
      }
      if (!have_schema) throw DataError(where + ": first record must carry 'channels'");

      Answer a;
      a.answer_id = rec.at("answer_id").get<std::string>();
      a.candidate_id = rec.at("candidate_id").get<std::string>();
      a.label = rec.at("label").get<int>();
      const auto split_str = rec.at("split").get<std::string>();
      const auto split = split_from_string(split_str);
      if (!split) throw DataError(where + ": unknown split '" + split_str + "'");

      const auto& frames = rec.at("frames");
      const std::size_t T = frames.size();
      const std::size_t C = corpus.schema.size();
      a.frames = Matrix(T, C);
      for (std::size_t t = 0; t < T; ++t) {
        const auto& row = frames.at(t);
        if (row.size() != C)
          throw DataError(where + ": frame " + std::to_string(t) + " has " +
                          std::to_string(row.size()) + " channels, expected " + std::to_string(C));
        for (std::size_t c = 0; c < C; ++c) a.frames.at(t, c) = row.at(c).get<double>();
      }
      if (rec.contains("events")) {
        for (const auto& e : rec["events"]) {
          PlantedEvent ev;
          ev.start_idx = e.at(0).get<int>();
          ev.end_idx = e.at(1).get<int>();
          ev.kind = e.at(2).get<std::string>();
          a.events.push_back(std::move(ev));
        }
      }
      if (corpus.split.count(a.answer_id))
        throw DataError(where + ": duplicate answer_id '" + a.answer_id + "'");
      corpus.split[a.answer_id] = *split;
      corpus.answers.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  if (!corpus.answers.empty()) corpus.validate();
  return corpus;
}

// ---------------------------------------------------------------------------

/// Mean-pool raw samples into overlapping windows (window_s wide, hop_s
/// apart). Output frame t averages raw rows [t*hop, t*hop + window).
inline Matrix window_aggregate(const Matrix& raw, double source_rate_hz, double window_s = 0.5,
                               double hop_s = 0.25) {
  if (source_rate_hz <= 0) throw ConfigError("source rate must be positive");
  const auto window = static_cast<std::size_t>(std::lround(window_s * source_rate_hz));
  const auto hop = static_cast<std::size_t>(std::lround(hop_s * source_rate_hz));
  if (window < 1 || hop < 1) throw ConfigError("window/hop too small for the source rate");
  if (raw.rows < window)
    throw DataError("input covers " + std::to_string(raw.rows) + " samples, needs at least " +
                    std::to_string(window));
  const std::size_t T = (raw.rows - window) / hop + 1;
  Matrix out(T, raw.cols);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < window; ++s) {
      const double* src = raw.row(t * hop + s);
      double* dst = out.row(t);
      for (std::size_t c = 0; c < raw.cols; ++c) dst[c] += src[c];
    }
    double* dst = out.row(t);
    for (std::size_t c = 0; c < raw.cols; ++c) dst[c] /= static_cast<double>(window);
  }
  return out;
}

}  // namespace attnslice

#endif  // ATTNSLICE_CORPUS_HPP
