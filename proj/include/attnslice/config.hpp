// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one nested JSON document aggregating the generator,
// trainer, peak-extraction and shallow-model settings, parsed strictly
// (unknown keys fail with their full path) and re-serialized verbatim so
// every experiment can record the exact values it ran with.

#ifndef ATTNSLICE_CONFIG_HPP
#define ATTNSLICE_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attnslice/common.hpp"
#include "attnslice/corpus.hpp"
#include "attnslice/forest.hpp"
#include "attnslice/peaks.hpp"
#include "attnslice/rng.hpp"
#include "attnslice/train.hpp"

namespace attnslice {

/// Forest defaults for the slice-feature tasks. The informative features are
/// a small slice of the 96, so sqrt-of-D feature sampling starves the trees;
/// a third of the features per split recovers them.
inline ForestConfig default_slice_forest() {
  ForestConfig fc;
  fc.mtry = 32;
  fc.min_leaf = 5;
  return fc;
}

/// Settings for the slice-feature classifiers and the statistical layer.
struct ShallowConfig {
  std::vector<double> lasso_lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  double svm_c = 1.0;
  double rbf_gamma = 0.0;  // <= 0 picks 1 / (D * mean feature variance)
  ForestConfig forest = default_slice_forest();
  int boruta_iters = 20;
  double boruta_alpha = 0.01;
  int bootstrap_instances = 100;
  double ttest_threshold = 1e-4;
  int k_random = 4;  // random slices drawn per principal slice
  std::uint64_t seed = 7;
  int threads = 0;  // 0 = use the hardware

  void validate() const {
    if (lasso_lambda_grid.empty()) throw ConfigError("shallow.lasso_lambda_grid must be non-empty");
    for (double l : lasso_lambda_grid)
      if (l <= 0) throw ConfigError("shallow.lasso_lambda_grid entries must be > 0");
    if (svm_c <= 0) throw ConfigError("shallow.svm_c must be > 0");
    if (boruta_iters < 0) throw ConfigError("shallow.boruta_iters must be >= 0");
    if (boruta_alpha <= 0 || boruta_alpha >= 1)
      throw ConfigError("shallow.boruta_alpha must be in (0,1)");
    if (bootstrap_instances < 1) throw ConfigError("shallow.bootstrap_instances must be >= 1");
    if (ttest_threshold <= 0 || ttest_threshold >= 1)
      throw ConfigError("shallow.ttest_threshold must be in (0,1)");
    if (k_random < 1) throw ConfigError("shallow.k_random must be >= 1");
    if (threads < 0) throw ConfigError("shallow.threads must be >= 0");
    forest.validate();
  }
};

/// Top-level document. Sub-config seeds not given in the file are derived
/// from the global seed, so one integer pins the whole pipeline while any
/// stage stays individually re-seedable.
struct RunConfig {
  GeneratorConfig generator;
  TrainConfig train;
  PeakConfig peaks;
  ShallowConfig shallow;
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  void validate() const {
    generator.validate();
    train.validate();
    peaks.validate();
    shallow.validate();
    if (out_dir.empty()) throw ConfigError("out_dir must be non-empty");
  }

  /// Derives the per-stage seeds from the global one. Only seeds the config
  /// file left unset are touched; parse_run_config calls this after parsing.
  void derive_seeds(bool gen_set, bool train_set, bool peaks_set, bool shallow_set) {
    if (!gen_set) generator.seed = mix_seed(seed, 0x67656e);
    if (!train_set) train.seed = mix_seed(seed, 0x747261);
    if (!peaks_set) peaks.seed = mix_seed(seed, 0x70656b);
    if (!shallow_set) shallow.seed = mix_seed(seed, 0x736861);
    shallow.forest.seed = mix_seed(shallow.seed, 0x666f72);
  }
};

namespace detail {

/// Strict reader over one JSON object: every key must be consumed by a
/// read_* call or finish() reports it with its full path.
class KeyReader {
 public:
  KeyReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  void read_double(const std::string& key, double& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    out = v.get<double>();
  }

  void read_int(const std::string& key, int& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    out = v.get<int>();
  }

  void read_size(const std::string& key, std::size_t& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
      throw ConfigError(at(key) + ": expected a non-negative integer");
    out = v.get<std::size_t>();
  }

  bool read_u64(const std::string& key, std::uint64_t& out) {
    if (!take(key)) return false;
    const auto& v = obj_.at(key);
    // unsigned storage can exceed the signed range, so only signed values
    // get the negativity check
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
      throw ConfigError(at(key) + ": expected a non-negative integer");
    out = v.get<std::uint64_t>();
    return true;
  }

  void read_string(const std::string& key, std::string& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    out = v.get<std::string>();
  }

  void read_double_vec(const std::string& key, std::vector<double>& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(at(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  const nlohmann::json* take_raw(const std::string& key) {
    if (!take(key)) return nullptr;
    return &obj_.at(key);
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown config key: " + at(it.key()));
  }

 private:
  bool take(const std::string& key) {
    if (!obj_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  const nlohmann::json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::vector<EventSpec> parse_events(const nlohmann::json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<EventSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string epath = path + "[" + std::to_string(i) + "]";
    KeyReader r(arr[i], epath);
    EventSpec spec;
    r.read_string("kind", spec.kind);
    if (spec.kind.empty()) throw ConfigError(epath + ".kind: must be non-empty");
    if (const nlohmann::json* p = r.take_raw("positive")) {
      if (!p->is_boolean()) throw ConfigError(epath + ".positive: expected a boolean");
      spec.positive = p->get<bool>();
    }
    if (const nlohmann::json* offs = r.take_raw("offsets")) {
      if (!offs->is_object()) throw ConfigError(epath + ".offsets: expected an object");
      for (auto it = offs->begin(); it != offs->end(); ++it) {
        if (!it.value().is_number())
          throw ConfigError(epath + ".offsets." + it.key() + ": expected a number");
        spec.channel_offsets.emplace_back(it.key(), it.value().get<double>());
      }
    }
    if (spec.channel_offsets.empty())
      throw ConfigError(epath + ".offsets: must name at least one channel");
    r.finish();
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace detail

/// Parses a config document. Absent keys keep their defaults; unknown keys
/// fail with the full key path. seed_override, when given, replaces the
/// global seed before per-stage seeds are derived.
inline RunConfig parse_run_config(const std::string& text,
                                  std::optional<std::uint64_t> seed_override = std::nullopt) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig rc;
  detail::KeyReader top(doc, "");
  top.read_string("out_dir", rc.out_dir);
  top.read_u64("seed", rc.seed);
  if (seed_override) rc.seed = *seed_override;

  bool gen_seed_set = false, train_seed_set = false, peaks_seed_set = false,
       shallow_seed_set = false;

  if (const nlohmann::json* g = top.take_raw("generator")) {
    detail::KeyReader r(*g, "generator");
    r.read_int("n_answers", rc.generator.n_answers);
    r.read_int("t_min", rc.generator.t_min);
    r.read_int("t_max", rc.generator.t_max);
    r.read_double("event_rate", rc.generator.event_rate);
    r.read_int("event_len_min", rc.generator.event_len_min);
    r.read_int("event_len_max", rc.generator.event_len_max);
    r.read_double("label_noise", rc.generator.label_noise);
    r.read_double("position_bias", rc.generator.position_bias);
    r.read_double("noise_sigma", rc.generator.noise_sigma);
    r.read_double("noise_rho", rc.generator.noise_rho);
    gen_seed_set = r.read_u64("seed", rc.generator.seed);
    if (const nlohmann::json* ev = r.take_raw("events"))
      rc.generator.events = detail::parse_events(*ev, "generator.events");
    r.finish();
  }

  if (const nlohmann::json* t = top.take_raw("train")) {
    detail::KeyReader r(*t, "train");
    r.read_size("hidden_dim", rc.train.hidden_dim);
    r.read_size("attn_dim", rc.train.attn_dim);
    r.read_double("learning_rate", rc.train.learning_rate);
    r.read_double("beta1", rc.train.beta1);
    r.read_double("beta2", rc.train.beta2);
    r.read_double("adam_eps", rc.train.adam_eps);
    r.read_size("batch_size", rc.train.batch_size);
    r.read_int("max_epochs", rc.train.max_epochs);
    r.read_int("patience", rc.train.patience);
    r.read_double("clip_norm", rc.train.clip_norm);
    r.read_int("ensemble_size", rc.train.ensemble_size);
    r.read_int("threads", rc.train.threads);
    train_seed_set = r.read_u64("seed", rc.train.seed);
    r.finish();
  }

  if (const nlohmann::json* p = top.take_raw("peaks")) {
    detail::KeyReader r(*p, "peaks");
    r.read_int("n_draws", rc.peaks.n_draws);
    r.read_double("eps", rc.peaks.eps);
    r.read_double("min_pts_scale", rc.peaks.min_pts_scale);
    r.read_int("min_pts_abs", rc.peaks.min_pts_abs);
    r.read_int("min_slice_len", rc.peaks.min_slice_len);
    peaks_seed_set = r.read_u64("seed", rc.peaks.seed);
    r.finish();
  }

  if (const nlohmann::json* s = top.take_raw("shallow")) {
    detail::KeyReader r(*s, "shallow");
    r.read_double_vec("lasso_lambda_grid", rc.shallow.lasso_lambda_grid);
    r.read_double("svm_c", rc.shallow.svm_c);
    r.read_double("rbf_gamma", rc.shallow.rbf_gamma);
    r.read_int("boruta_iters", rc.shallow.boruta_iters);
    r.read_double("boruta_alpha", rc.shallow.boruta_alpha);
    r.read_int("bootstrap_instances", rc.shallow.bootstrap_instances);
    r.read_double("ttest_threshold", rc.shallow.ttest_threshold);
    r.read_int("k_random", rc.shallow.k_random);
    r.read_int("threads", rc.shallow.threads);
    shallow_seed_set = r.read_u64("seed", rc.shallow.seed);
    if (const nlohmann::json* f = r.take_raw("forest")) {
      detail::KeyReader fr(*f, "shallow.forest");
      fr.read_int("n_trees", rc.shallow.forest.n_trees);
      fr.read_int("max_depth", rc.shallow.forest.max_depth);
      fr.read_int("min_leaf", rc.shallow.forest.min_leaf);
      fr.read_int("mtry", rc.shallow.forest.mtry);
      fr.read_int("n_bins", rc.shallow.forest.n_bins);
      fr.finish();
    }
    r.finish();
  }

  top.finish();
  rc.derive_seeds(gen_seed_set, train_seed_set, peaks_seed_set, shallow_seed_set);
  rc.shallow.forest.threads = rc.shallow.threads;
  rc.validate();
  return rc;
}

inline RunConfig load_run_config(const std::string& path,
                                 std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), seed_override);
}

/// Serializes the fully resolved document, derived seeds included, so the
/// output directory records exactly what ran.
inline nlohmann::json resolved_config_json(const RunConfig& rc) {
  nlohmann::json doc;
  doc["out_dir"] = rc.out_dir;
  doc["seed"] = rc.seed;

  auto& g = doc["generator"];
  g["n_answers"] = rc.generator.n_answers;
  g["t_min"] = rc.generator.t_min;
  g["t_max"] = rc.generator.t_max;
  g["event_rate"] = rc.generator.event_rate;
  g["event_len_min"] = rc.generator.event_len_min;
  g["event_len_max"] = rc.generator.event_len_max;
  g["label_noise"] = rc.generator.label_noise;
  g["position_bias"] = rc.generator.position_bias;
  g["noise_sigma"] = rc.generator.noise_sigma;
  g["noise_rho"] = rc.generator.noise_rho;
  g["seed"] = rc.generator.seed;
  auto& evs = g["events"] = nlohmann::json::array();
  for (const EventSpec& e : rc.generator.events) {
    nlohmann::json je;
    je["kind"] = e.kind;
    je["positive"] = e.positive;
    auto& offs = je["offsets"] = nlohmann::json::object();
    for (const auto& [ch, off] : e.channel_offsets) offs[ch] = off;
    evs.push_back(std::move(je));
  }

  auto& t = doc["train"];
  t["hidden_dim"] = rc.train.hidden_dim;
  t["attn_dim"] = rc.train.attn_dim;
  t["learning_rate"] = rc.train.learning_rate;
  t["beta1"] = rc.train.beta1;
  t["beta2"] = rc.train.beta2;
  t["adam_eps"] = rc.train.adam_eps;
  t["batch_size"] = rc.train.batch_size;
  t["max_epochs"] = rc.train.max_epochs;
  t["patience"] = rc.train.patience;
  t["clip_norm"] = rc.train.clip_norm;
  t["ensemble_size"] = rc.train.ensemble_size;
  t["threads"] = rc.train.threads;
  t["seed"] = rc.train.seed;

  auto& p = doc["peaks"];
  p["n_draws"] = rc.peaks.n_draws;
  p["eps"] = rc.peaks.eps;
  p["min_pts_scale"] = rc.peaks.min_pts_scale;
  p["min_pts_abs"] = rc.peaks.min_pts_abs;
  p["min_slice_len"] = rc.peaks.min_slice_len;
  p["seed"] = rc.peaks.seed;

  auto& s = doc["shallow"];
  s["lasso_lambda_grid"] = rc.shallow.lasso_lambda_grid;
  s["svm_c"] = rc.shallow.svm_c;
  s["rbf_gamma"] = rc.shallow.rbf_gamma;
  s["boruta_iters"] = rc.shallow.boruta_iters;
  s["boruta_alpha"] = rc.shallow.boruta_alpha;
  s["bootstrap_instances"] = rc.shallow.bootstrap_instances;
  s["ttest_threshold"] = rc.shallow.ttest_threshold;
  s["k_random"] = rc.shallow.k_random;
  s["threads"] = rc.shallow.threads;
  s["seed"] = rc.shallow.seed;
  auto& f = s["forest"];
  f["n_trees"] = rc.shallow.forest.n_trees;
  f["max_depth"] = rc.shallow.forest.max_depth;
  f["min_leaf"] = rc.shallow.forest.min_leaf;
  f["mtry"] = rc.shallow.forest.mtry;
  f["n_bins"] = rc.shallow.forest.n_bins;

  return doc;
}

inline void save_resolved_config(const RunConfig& rc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write resolved config: " + path);
  out << resolved_config_json(rc).dump(2) << "\n";
}

}  // namespace attnslice

#endif  // ATTNSLICE_CONFIG_HPP
