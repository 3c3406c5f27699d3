// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Adam training loop for the attention encoder, early stopping on validation
// mean F1, deterministic ensemble training, and the versioned model file.

#ifndef ATTNSLICE_TRAIN_HPP
#define ATTNSLICE_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "attnslice/common.hpp"
#include "attnslice/corpus.hpp"
#include "attnslice/encoder.hpp"
#include "attnslice/metrics.hpp"
#include "attnslice/parallel.hpp"

namespace attnslice {

struct TrainConfig {
  std::size_t hidden_dim = 32;
  std::size_t attn_dim = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 32;
  int max_epochs = 100;
  int patience = 5;
  double clip_norm = 5.0;
  int ensemble_size = 5;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = use the hardware

  void validate() const {
    if (hidden_dim < 1 || attn_dim < 1) throw ConfigError("train.hidden_dim/attn_dim must be >= 1");
    if (learning_rate <= 0) throw ConfigError("train.learning_rate must be > 0");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
      throw ConfigError("train.beta1/beta2 must be in [0,1)");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("train.patience must be >= 1");
    if (clip_norm <= 0) throw ConfigError("train.clip_norm must be > 0");
    if (ensemble_size < 1) throw ConfigError("train.ensemble_size must be >= 1");
    if (threads < 0) throw ConfigError("train.threads must be >= 0");
  }
};

/// Adam with bias correction, applied to the fixed flat() traversal of the
/// parameter struct.
class AdamOptimizer {
 public:
  AdamOptimizer(EncoderParams& params, const TrainConfig& cfg) : cfg_(cfg) {
    for (Vec* v : params.flat()) {
      m_.emplace_back(v->size(), 0.0);
      v_.emplace_back(v->size(), 0.0);
    }
  }

  void step(EncoderParams& params, EncoderParams& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    auto pv = params.flat();
    auto gv = grads.flat();
    for (std::size_t k = 0; k < pv.size(); ++k) {
      Vec& p = *pv[k];
      const Vec& g = *gv[k];
      Vec& m = m_[k];
      Vec& v = v_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
      }
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<Vec> m_, v_;
  double t_ = 0;
};

/// Scales gradients in place so their global L2 norm is at most max_norm.
inline double clip_gradients(EncoderParams& grads, double max_norm) {
  double sq = 0.0;
  for (const Vec* v : const_cast<const EncoderParams&>(grads).flat())
    for (double g : *v) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const double scale = max_norm / norm;
    for (Vec* v : grads.flat())
      for (double& g : *v) g *= scale;
  }
  return norm;
}

/// One training view: sequences and labels, borrowed from a corpus.
struct DataView {
  std::vector<const Matrix*> x;
  std::vector<int> y;
  std::vector<std::string> ids;

  std::size_t size() const { return x.size(); }
};

inline DataView view_of_split(const Corpus& corpus, Split split) {
  DataView v;
  for (const Answer* a : corpus.answers_in(split)) {
    v.x.push_back(&a->frames);
    v.y.push_back(a->label);
    v.ids.push_back(a->answer_id);
  }
  return v;
}

inline std::vector<double> predict_all(const EncoderParams& params, const DataView& data,
                                       int threads = 0) {
  std::vector<double> out(data.size());
  parallel_for(
      data.size(), [&](std::size_t i) { out[i] = encoder_forward(params, *data.x[i]); },
      static_cast<unsigned>(std::max(0, threads)));
  return out;
}

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_mean_f1 = 0.0;
};

struct TrainResult {
  EncoderParams params;
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_f1 = 0.0;
};

namespace detail {

/// Sum of per-sequence gradients over [begin, end) of the batch order,
/// split across threads. Returns the summed loss.
inline double accumulate_batch(const EncoderParams& params, const DataView& data,
                               const std::vector<std::size_t>& order, std::size_t begin,
                               std::size_t end, EncoderParams& grads, int threads) {
  const std::size_t n = end - begin;
  const int nthreads = std::min(
      static_cast<int>(recommended_threads(static_cast<unsigned>(std::max(0, threads)))),
      static_cast<int>(n));
  double loss = 0.0;
  if (nthreads <= 1) {
    EncoderCache cache;
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = order[k];
      encoder_forward(params, *data.x[i], cache);
      loss += bce_loss_from_logit(cache, data.y[i]);
      encoder_backward(params, *data.x[i], cache, data.y[i], grads);
    }
    return loss;
  }

  std::vector<EncoderParams> local(nthreads, zeros_like(params));
  std::vector<double> local_loss(nthreads, 0.0);
  std::vector<std::thread> pool;
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = begin + n * w / nthreads;
      const std::size_t hi = begin + n * (w + 1) / nthreads;
      EncoderCache cache;
      for (std::size_t k = lo; k < hi; ++k) {
        const std::size_t i = order[k];
        encoder_forward(params, *data.x[i], cache);
        local_loss[w] += bce_loss_from_logit(cache, data.y[i]);
        encoder_backward(params, *data.x[i], cache, data.y[i], local[w]);
      }
    });
  }
  for (auto& t : pool) t.join();
  auto gv = grads.flat();
  for (int w = 0; w < nthreads; ++w) {
    loss += local_loss[w];
    auto lv = local[w].flat();
    for (std::size_t k = 0; k < gv.size(); ++k)
      for (std::size_t i = 0; i < gv[k]->size(); ++i) (*gv[k])[i] += (*lv[k])[i];
  }
  return loss;
}

}  // namespace detail

/// Trains one encoder. Shuffled mini-batches, Adam, global-norm clipping,
/// early stopping on validation mean F1 with the best-epoch weights kept.
inline TrainResult train_encoder(const DataView& train, const DataView& val,
                                 const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (train.size() == 0) throw DataError("training split is empty");
  if (val.size() == 0) throw DataError("validation split is empty");
  const std::size_t input_dim = train.x[0]->cols;

  Rng rng(seed);
  EncoderParams params = init_encoder(input_dim, cfg.hidden_dim, cfg.attn_dim, rng);
  EncoderParams grads = zeros_like(params);
  AdamOptimizer adam(params, cfg);

  TrainResult result;
  result.params = params;
  int since_best = 0;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      grads.fill(0.0);
      epoch_loss += detail::accumulate_batch(params, train, order, begin, end, grads, cfg.threads);
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (Vec* v : grads.flat())
        for (double& g : *v) g *= inv;
      clip_gradients(grads, cfg.clip_norm);
      adam.step(params, grads);
    }
    epoch_loss /= static_cast<double>(train.size());
    if (!std::isfinite(epoch_loss))
      throw DataError("training diverged at epoch " + std::to_string(epoch) +
                      ": non-finite loss; lower the learning rate");

    const std::vector<double> val_scores = predict_all(params, val, cfg.threads);
    double val_loss = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) val_loss += bce_loss(val_scores[i], val.y[i]);
    val_loss /= static_cast<double>(val.size());
    const double val_f1 = f1_metrics(val.y, threshold_predictions(val_scores)).mean_f1;

    result.history.push_back({epoch, epoch_loss, val_loss, val_f1});
    if (val_f1 > result.best_val_f1 || result.best_epoch == 0) {
      result.best_val_f1 = val_f1;
      result.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

struct Ensemble {
  std::vector<std::string> channels;
  std::vector<EncoderParams> members;

  std::size_t size() const { return members.size(); }
};

struct EnsembleResult {
  Ensemble ensemble;
  std::vector<TrainResult> member_stats;  // params cleared, history kept
};

/// Trains ensemble_size encoders from seeds seed, seed+1, ... Members are
/// independent so they train concurrently when threads allow.
inline EnsembleResult train_ensemble(const Corpus& corpus, const TrainConfig& cfg) {
  cfg.validate();
  const DataView train = view_of_split(corpus, Split::train);
  const DataView val = view_of_split(corpus, Split::validation);

  const int k = cfg.ensemble_size;
  std::vector<TrainResult> results(static_cast<std::size_t>(k));
  const int total = static_cast<int>(recommended_threads(static_cast<unsigned>(std::max(0, cfg.threads))));
  const int outer = std::min(total, k);
  TrainConfig member_cfg = cfg;
  member_cfg.threads = std::max(1, total / std::max(1, outer));
  parallel_for(
      static_cast<std::size_t>(k),
      [&](std::size_t i) { results[i] = train_encoder(train, val, member_cfg, cfg.seed + i); },
      static_cast<unsigned>(outer));

  EnsembleResult out;
  out.ensemble.channels = corpus.schema.names;
  for (auto& r : results) {
    out.ensemble.members.push_back(std::move(r.params));
    r.params = EncoderParams{};
    out.member_stats.push_back(std::move(r));
  }
  return out;
}

/// Mean positive-class probability across members.
inline double ensemble_predict(const Ensemble& e, const Matrix& x) {
  double acc = 0.0;
  for (const auto& m : e.members) acc += encoder_forward(m, x);
  return acc / static_cast<double>(e.members.size());
}

/// Attention weights averaged over members and renormalized to sum to one.
inline Vec attention_profile(const Ensemble& e, const Matrix& x) {
  if (e.members.empty()) throw DataError("ensemble has no members");
  Vec mean(x.rows, 0.0);
  EncoderCache cache;
  for (const auto& m : e.members) {
    encoder_forward(m, x, cache);
    for (std::size_t t = 0; t < x.rows; ++t) mean[t] += cache.alpha[t];
  }
  double total = 0.0;
  for (double& v : mean) total += v;
  if (total <= 0) throw DataError("attention profile degenerated to zero mass");
  for (double& v : mean) v /= total;
  return mean;
}

// ---------------------------------------------------------------------------
// Model file: versioned JSON with named tensors per member.

namespace detail {

inline nlohmann::json direction_to_json(const GruDirParams& d) {
  return {{"wz", d.wz.a}, {"uz", d.uz.a}, {"bz", d.bz}, {"wr", d.wr.a}, {"ur", d.ur.a},
          {"br", d.br},   {"wh", d.wh.a}, {"uh", d.uh.a}, {"bh", d.bh}};
}

inline void direction_from_json(const nlohmann::json& j, GruDirParams& d) {
  const auto take = [&](const char* key, Vec& into) {
    const auto v = j.at(key).get<Vec>();
    if (v.size() != into.size())
      throw DataError(std::string("model tensor '") + key + "' has wrong size");
    into = v;
  };
  take("wz", d.wz.a);
  take("uz", d.uz.a);
  take("bz", d.bz);
  take("wr", d.wr.a);
  take("ur", d.ur.a);
  take("br", d.br);
  take("wh", d.wh.a);
  take("uh", d.uh.a);
  take("bh", d.bh);
}

}  // namespace detail

inline void save_ensemble(const Ensemble& e, const std::string& path) {
  if (e.members.empty()) throw DataError("refusing to save an empty ensemble");
  nlohmann::json j;
  j["format"] = "attnslice-ensemble";
  j["version"] = 1;
  j["channels"] = e.channels;
  j["input_dim"] = e.members[0].input_dim;
  j["hidden_dim"] = e.members[0].hidden_dim;
  j["attn_dim"] = e.members[0].attn_dim;
  auto& members = j["members"] = nlohmann::json::array();
  for (const auto& m : e.members) {
    nlohmann::json mj;
    mj["fwd"] = detail::direction_to_json(m.fwd);
    mj["bwd"] = detail::direction_to_json(m.bwd);
    mj["wa"] = m.wa.a;
    mj["ba"] = m.ba;
    mj["ua"] = m.ua;
    mj["wo"] = m.wo;
    mj["bo"] = m.bo;
    members.push_back(std::move(mj));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "attnslice-ensemble")
      throw DataError("'" + path + "' is not a model file");
    if (j.at("version").get<int>() != 1)
      throw DataError("model file version " + j["version"].dump() + " is not supported");
    Ensemble e;
    e.channels = j.at("channels").get<std::vector<std::string>>();
    const auto input_dim = j.at("input_dim").get<std::size_t>();
    const auto hidden_dim = j.at("hidden_dim").get<std::size_t>();
    const auto attn_dim = j.at("attn_dim").get<std::size_t>();
    if (input_dim != e.channels.size())
      throw DataError("model channel list does not match input_dim");
    Rng dummy(0);
    for (const auto& mj : j.at("members")) {
      EncoderParams p = init_encoder(input_dim, hidden_dim, attn_dim, dummy);
      detail::direction_from_json(mj.at("fwd"), p.fwd);
      detail::direction_from_json(mj.at("bwd"), p.bwd);
      const auto take = [&](const char* key, Vec& into) {
        const auto v = mj.at(key).get<Vec>();
        if (v.size() != into.size())
          throw DataError(std::string("model tensor '") + key + "' has wrong size");
        into = v;
      };
      take("wa", p.wa.a);
      take("ba", p.ba);
      take("ua", p.ua);
      take("wo", p.wo);
      take("bo", p.bo);
      e.members.push_back(std::move(p));
    }
    if (e.members.empty()) throw DataError("model file has no members");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("model file '" + path + "' is malformed: " + ex.what());
  }
}

}  // namespace attnslice

#endif  // ATTNSLICE_TRAIN_HPP
