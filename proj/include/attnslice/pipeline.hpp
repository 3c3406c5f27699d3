// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end orchestration: each cmd_* runs one pipeline stage, writes its
// artifacts under the run directory, and returns the in-memory result so
// callers can chain stages without re-reading files. Every stage re-writes
// the resolved config, so the directory always records what produced it.

#ifndef ATTNSLICE_PIPELINE_HPP
#define ATTNSLICE_PIPELINE_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attnslice/bootstrap.hpp"
#include "attnslice/common.hpp"
#include "attnslice/config.hpp"
#include "attnslice/corpus.hpp"
#include "attnslice/forest.hpp"
#include "attnslice/importance.hpp"
#include "attnslice/linear.hpp"
#include "attnslice/metrics.hpp"
#include "attnslice/parallel.hpp"
#include "attnslice/peaks.hpp"
#include "attnslice/slices.hpp"
#include "attnslice/stats.hpp"
#include "attnslice/svg.hpp"
#include "attnslice/svm.hpp"
#include "attnslice/train.hpp"

namespace attnslice {

/// Artifact locations under one run directory.
struct RunPaths {
  std::string dir;

  std::string resolved_config() const { return dir + "/resolved_config.json"; }
  std::string corpus() const { return dir + "/corpus.jsonl"; }
  std::string ensemble() const { return dir + "/ensemble.json"; }
  std::string train_metrics() const { return dir + "/train_metrics.csv"; }
  std::string slices() const { return dir + "/slices.csv"; }
  std::string peak_rates() const { return dir + "/peak_rates.csv"; }
  std::string duration_hist_csv() const { return dir + "/duration_hist.csv"; }
  std::string duration_hist_svg() const { return dir + "/duration_hist.svg"; }
  std::string rel_start_hist_csv() const { return dir + "/rel_start_hist.csv"; }
  std::string rel_start_hist_svg() const { return dir + "/rel_start_hist.svg"; }
  std::string slice_dataset() const { return dir + "/slice_dataset.csv"; }
  std::string kind_results() const { return dir + "/kind_results.csv"; }
  std::string lasso_importance_csv() const { return dir + "/lasso_importance.csv"; }
  std::string boruta_csv() const { return dir + "/boruta.csv"; }
  std::string feature_ttests() const { return dir + "/feature_ttests.csv"; }
  std::string auc_results() const { return dir + "/auc_results.csv"; }
  std::string auc_scores() const { return dir + "/auc_scores.csv"; }
  std::string report() const { return dir + "/report.md"; }
  std::string answer_plot(const std::string& answer_id) const {
    return dir + "/answer_" + answer_id + ".svg";
  }
};

inline RunPaths run_paths(const RunConfig& rc) { return RunPaths{rc.out_dir}; }

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("short write to " + path);
}

inline void prepare_run_dir(const RunConfig& rc) {
  std::error_code ec;
  std::filesystem::create_directories(rc.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + rc.out_dir + ": " + ec.message());
  save_resolved_config(rc, run_paths(rc).resolved_config());
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ",";
    line += cells[i];
  }
  line += "\n";
  return line;
}

inline void save_histogram_csv(const Histogram& h, const std::string& path) {
  std::string out = "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += csv_row({format_double(h.bin_start + h.bin_width * static_cast<double>(i)),
                    format_double(h.bin_start + h.bin_width * static_cast<double>(i + 1)),
                    format_double(h.counts[i])});
  }
  write_text_file(path, out);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate

inline Corpus cmd_generate(const RunConfig& rc) {
  detail::prepare_run_dir(rc);
  Corpus corpus = generate_corpus(rc.generator);
  save_corpus(corpus, run_paths(rc).corpus());
  return corpus;
}

// ---------------------------------------------------------------------------
// train

inline EnsembleResult cmd_train(const RunConfig& rc, const Corpus& corpus) {
  detail::prepare_run_dir(rc);
  const RunPaths paths = run_paths(rc);
  EnsembleResult res = train_ensemble(corpus, rc.train);
  save_ensemble(res.ensemble, paths.ensemble());

  const DataView test = view_of_split(corpus, Split::test);
  std::string csv = "model,best_epoch,val_mean_f1,test_mean_f1,test_auc\n";
  std::vector<double> ens_scores(test.size(), 0.0);
  for (std::size_t m = 0; m < res.ensemble.members.size(); ++m) {
    const std::vector<double> scores = predict_all(res.ensemble.members[m], test, rc.train.threads);
    for (std::size_t i = 0; i < scores.size(); ++i) ens_scores[i] += scores[i];
    const F1Report f1 = f1_metrics(test.y, threshold_predictions(scores));
    csv += detail::csv_row({"member_" + std::to_string(m),
                            std::to_string(res.member_stats[m].best_epoch),
                            format_double(res.member_stats[m].best_val_f1),
                            format_double(f1.mean_f1), format_double(roc_auc(test.y, scores))});
  }
  for (double& s : ens_scores) s /= static_cast<double>(res.ensemble.members.size());
  const F1Report ens_f1 = f1_metrics(test.y, threshold_predictions(ens_scores));
  double mean_val = 0.0;
  for (const auto& ms : res.member_stats) mean_val += ms.best_val_f1;
  mean_val /= static_cast<double>(res.member_stats.size());
  csv += detail::csv_row({"ensemble", "", format_double(mean_val), format_double(ens_f1.mean_f1),
                          format_double(roc_auc(test.y, ens_scores))});
  detail::write_text_file(paths.train_metrics(), csv);
  return res;
}

// ---------------------------------------------------------------------------
// extract

inline SliceDataset cmd_extract(const RunConfig& rc, const Corpus& corpus, const Ensemble& ens) {
  detail::prepare_run_dir(rc);
  const RunPaths paths = run_paths(rc);

  // one attention pass; slices.csv and the feature dataset reuse the curves
  std::vector<Vec> profiles(corpus.answers.size());
  parallel_for(
      corpus.answers.size(),
      [&](std::size_t i) { profiles[i] = attention_profile(ens, corpus.answers[i].frames); },
      static_cast<unsigned>(std::max(0, rc.train.threads)));

  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < corpus.answers.size(); ++i)
    index_of[corpus.answers[i].answer_id] = i;

  std::string slice_csv = "answer_id,split,start_idx,end_idx,amplitude,principal\n";
  std::map<Split, std::pair<int, int>> peak_counts;  // split -> (answers, with peaks)
  std::vector<double> durations_s, rel_starts;
  for (const auto& [id, i] : index_of) {
    const Answer& a = corpus.answers[i];
    const std::vector<Slice> slices = extract_slices_for_answer(profiles[i], id, rc.peaks);
    const std::optional<Slice> prin = principal_slice(slices);
    auto& pc = peak_counts[corpus.split_of(id)];
    ++pc.first;
    if (!slices.empty()) ++pc.second;
    for (const Slice& s : slices) {
      const bool is_prin = prin && s.start_idx == prin->start_idx && s.end_idx == prin->end_idx;
      slice_csv += detail::csv_row({id, to_string(corpus.split_of(id)),
                                    std::to_string(s.start_idx), std::to_string(s.end_idx),
                                    format_double(s.amplitude), is_prin ? "1" : "0"});
      durations_s.push_back(static_cast<double>(s.length()) / 4.0);  // 4 Hz frames
      rel_starts.push_back(static_cast<double>(s.start_idx) / static_cast<double>(a.num_frames()));
    }
  }
  detail::write_text_file(paths.slices(), slice_csv);

  std::string rate_csv = "split,n_answers,with_peaks,rate\n";
  int total_n = 0, total_with = 0;
  for (const auto& [split, pc] : peak_counts) {
    total_n += pc.first;
    total_with += pc.second;
    rate_csv += detail::csv_row({to_string(split), std::to_string(pc.first),
                                 std::to_string(pc.second),
                                 format_double(static_cast<double>(pc.second) / pc.first)});
  }
  rate_csv += detail::csv_row({"overall", std::to_string(total_n), std::to_string(total_with),
                               format_double(total_n ? static_cast<double>(total_with) / total_n : 0.0)});
  detail::write_text_file(paths.peak_rates(), rate_csv);

  const Histogram dur_hist = make_histogram(durations_s, 0.25);
  detail::save_histogram_csv(dur_hist, paths.duration_hist_csv());
  detail::write_text_file(paths.duration_hist_svg(),
                          render_histogram(dur_hist, "Slice duration", "seconds", "slices"));
  const Histogram rel_hist = make_histogram(rel_starts, 0.05);
  detail::save_histogram_csv(rel_hist, paths.rel_start_hist_csv());
  detail::write_text_file(paths.rel_start_hist_svg(),
                          render_histogram(rel_hist, "Slice relative start", "start / T", "slices"));

  SliceDataset ds = build_slice_dataset(
      corpus,
      [&](const Answer& a) {
        const auto it = index_of.find(a.answer_id);
        if (it == index_of.end()) throw DataError("answer '" + a.answer_id + "' missing a profile");
        return profiles[it->second];
      },
      rc.peaks, rc.peaks.seed, rc.shallow.k_random, rc.train.threads);
  save_slice_dataset(ds, paths.slice_dataset());
  return ds;
}

// ---------------------------------------------------------------------------
// classify-kind

struct KindModelRow {
  std::string model;
  F1Report test;
};

struct KindResults {
  std::vector<KindModelRow> rows;  // majority, uniform_random, lasso, forest
  double lasso_lambda = 0.0;
  LinearModel lasso;
  Forest forest;
  std::vector<ImportanceEntry> lasso_ranking;
  BorutaResult boruta;
  std::vector<FeatureTest> ttests;
};

namespace detail {

/// Picks the lasso penalty by validation Mean F1; ties prefer the sparser
/// (larger) penalty so reported importances stay short.
inline std::pair<LinearModel, double> select_lasso(const Matrix& x_train,
                                                   const std::vector<int>& y_train,
                                                   const Matrix& x_val,
                                                   const std::vector<int>& y_val,
                                                   const std::vector<double>& grid) {
  std::vector<double> lambdas = grid;
  std::sort(lambdas.begin(), lambdas.end());
  std::optional<LinearModel> best;
  double best_f1 = -1.0, best_lambda = 0.0;
  for (double lambda : lambdas) {
    LinearModel m = train_lasso(x_train, y_train, lambda);
    const F1Report r = f1_metrics(y_val, threshold_predictions(m.predict_proba(x_val)));
    if (r.mean_f1 >= best_f1) {
      best_f1 = r.mean_f1;
      best = std::move(m);
      best_lambda = lambda;
    }
  }
  return {std::move(*best), best_lambda};
}

}  // namespace detail

inline KindResults cmd_classify_kind(const RunConfig& rc, const SliceDataset& ds) {
  detail::prepare_run_dir(rc);
  const RunPaths paths = run_paths(rc);
  const SliceMatrix train = slice_matrix(ds, Split::train);
  const SliceMatrix val = slice_matrix(ds, Split::validation);
  const SliceMatrix test = slice_matrix(ds, Split::test);
  if (train.x.rows == 0 || test.x.rows == 0) throw DataError("kind task needs train and test rows");

  KindResults out;

  // baselines: the training majority kind, and a seeded fair coin
  int ones = 0;
  for (int k : train.kind) ones += k;
  const int majority = 2 * ones >= static_cast<int>(train.kind.size()) ? 1 : 0;
  std::vector<int> pred(test.kind.size(), majority);
  out.rows.push_back({"majority", f1_metrics(test.kind, pred)});

  Rng coin(mix_seed(rc.shallow.seed, 0xc01));
  for (auto& p : pred) p = coin.bernoulli(0.5) ? 1 : 0;
  out.rows.push_back({"uniform_random", f1_metrics(test.kind, pred)});

  auto [lasso, lambda] = detail::select_lasso(train.x, train.kind, val.x, val.kind,
                                              rc.shallow.lasso_lambda_grid);
  out.lasso = std::move(lasso);
  out.lasso_lambda = lambda;
  out.rows.push_back(
      {"lasso", f1_metrics(test.kind, threshold_predictions(out.lasso.predict_proba(test.x)))});

  ForestConfig fc = rc.shallow.forest;
  fc.seed = mix_seed(rc.shallow.seed, 0xf05e57);
  fc.threads = rc.shallow.threads;
  out.forest = train_random_forest(train.x, train.kind, fc);
  out.rows.push_back(
      {"forest", f1_metrics(test.kind, threshold_predictions(out.forest.predict_proba(test.x)))});

  std::string csv = "model,mean_f1,f1_pos,f1_neg,accuracy,lambda\n";
  for (const auto& row : out.rows) {
    csv += detail::csv_row({row.model, format_double(row.test.mean_f1),
                            format_double(row.test.f1_pos), format_double(row.test.f1_neg),
                            format_double(row.test.accuracy),
                            row.model == "lasso" ? format_double(out.lasso_lambda) : ""});
  }
  detail::write_text_file(paths.kind_results(), csv);

  // importance artifacts live on the train split so the test stays held out
  out.lasso_ranking = lasso_importance(out.lasso, ds.feature_names);
  std::string imp = "rank,feature,weight,channel,group\n";
  for (const auto& e : out.lasso_ranking) {
    std::string channel = e.name;
    for (const char* suffix : {"_mean", "_up", "_down"}) {
      const std::string s = suffix;
      if (channel.size() > s.size() && channel.compare(channel.size() - s.size(), s.size(), s) == 0) {
        channel = channel.substr(0, channel.size() - s.size());
        break;
      }
    }
    imp += detail::csv_row({std::to_string(e.rank), e.name, format_double(e.weight), channel,
                            to_string(channel_group_for(channel))});
  }
  detail::write_text_file(paths.lasso_importance_csv(), imp);

  ForestConfig bc = rc.shallow.forest;
  bc.threads = rc.shallow.threads;
  out.boruta = boruta_importance(train.x, train.kind, rc.shallow.boruta_iters,
                                 rc.shallow.boruta_alpha, mix_seed(rc.shallow.seed, 0xb02), bc);
  std::string bor = "feature,decision,hits,n_iter\n";
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
    const auto in = [&](const std::vector<int>& v) {
      return std::find(v.begin(), v.end(), static_cast<int>(j)) != v.end();
    };
    const char* decision = in(out.boruta.confirmed)   ? "confirmed"
                           : in(out.boruta.rejected)  ? "rejected"
                                                      : "tentative";
    bor += detail::csv_row({ds.feature_names[j], decision, std::to_string(out.boruta.hits[j]),
                            std::to_string(out.boruta.n_iter)});
  }
  detail::write_text_file(paths.boruta_csv(), bor);

  out.ttests = per_feature_t_tests(ds, Split::test, rc.shallow.ttest_threshold);
  std::string tt = "feature,mean_attention,mean_random,t,p,significant\n";
  for (const auto& ft : out.ttests) {
    tt += detail::csv_row({ft.name, format_double(ft.mean_attention),
                           format_double(ft.mean_random), format_double(ft.t), format_double(ft.p),
                           ft.significant ? "1" : "0"});
  }
  detail::write_text_file(paths.feature_ttests(), tt);
  return out;
}

// ---------------------------------------------------------------------------
// compare-auc

struct AucConditionRow {
  std::string model;
  BootstrapResult attention;
  BootstrapResult random;
  WelchResult welch;
};

struct AucComparison {
  std::vector<AucConditionRow> rows;  // lasso, linear_svm, rbf_svm, forest
};

namespace detail {

/// Hirability design matrix for one condition: the attention row per answer,
/// or its first duration-matched random row.
inline std::pair<Matrix, std::vector<int>> hirability_matrix(const SliceDataset& ds, Split split,
                                                             bool attention) {
  std::vector<const SliceRow*> picked;
  std::string last_id;
  for (const SliceRow* r : ds.rows_in(split)) {
    if (attention) {
      if (r->kind_label == 1) picked.push_back(r);
    } else if (r->kind_label == 0 && r->answer_id != last_id) {
      picked.push_back(r);
      last_id = r->answer_id;
    }
  }
  Matrix x(picked.size(), ds.feature_names.size());
  std::vector<int> y;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    std::copy(picked[i]->features.begin(), picked[i]->features.end(), x.row(i));
    y.push_back(picked[i]->hirability_label);
  }
  return {std::move(x), std::move(y)};
}

inline std::vector<double> clean_scores(const BootstrapResult& b) {
  std::vector<double> out;
  for (std::size_t i = 0; i < b.scores.size(); ++i)
    out.push_back(b.scores[i]);
  if (b.skipped > 0) {
    out.clear();
    for (double s : b.scores)
      if (s >= 0) out.push_back(s);
  }
  return out;
}

}  // namespace detail

inline AucComparison cmd_compare_auc(const RunConfig& rc, const SliceDataset& ds) {
  detail::prepare_run_dir(rc);
  const RunPaths paths = run_paths(rc);

  struct Cond {
    Matrix x_train, x_val, x_test;
    std::vector<int> y_train, y_val, y_test;
  };
  Cond conds[2];  // 0 = attention, 1 = random
  for (int c = 0; c < 2; ++c) {
    const bool attn = c == 0;
    std::tie(conds[c].x_train, conds[c].y_train) =
        detail::hirability_matrix(ds, Split::train, attn);
    std::tie(conds[c].x_val, conds[c].y_val) =
        detail::hirability_matrix(ds, Split::validation, attn);
    std::tie(conds[c].x_test, conds[c].y_test) = detail::hirability_matrix(ds, Split::test, attn);
    if (conds[c].x_train.rows == 0 || conds[c].x_test.rows == 0)
      throw DataError("hirability task needs train and test rows in both conditions");
  }

  // the lasso penalty is fixed per condition before resampling so bootstrap
  // replicas measure estimator variance, not selection variance
  double lambda[2];
  for (int c = 0; c < 2; ++c)
    lambda[c] = detail::select_lasso(conds[c].x_train, conds[c].y_train, conds[c].x_val,
                                     conds[c].y_val, rc.shallow.lasso_lambda_grid)
                    .second;

  AucComparison out;
  const int n_boot = rc.shallow.bootstrap_instances;
  const int threads = rc.shallow.threads;
  for (const std::string model : {"lasso", "linear_svm", "rbf_svm", "forest"}) {
    AucConditionRow row;
    row.model = model;
    for (int c = 0; c < 2; ++c) {
      const Cond& cd = conds[c];
      const std::uint64_t seed = mix_seed(rc.shallow.seed, hash_string(model) + (c ? 1 : 0));
      BootstrapResult b;
      if (model == "lasso") {
        const double l = lambda[c];
        b = bootstrap_auc(
            [l](const Matrix& x, const std::vector<int>& y) {
              LinearModel m = train_lasso(x, y, l);
              return [m](const Matrix& xt) { return m.decision_all(xt); };
            },
            cd.x_train, cd.y_train, cd.x_test, cd.y_test, n_boot, seed, threads);
      } else if (model == "linear_svm") {
        const double c_param = rc.shallow.svm_c;
        b = bootstrap_auc(
            [c_param](const Matrix& x, const std::vector<int>& y) {
              LinearModel m = train_linear_svm(x, y, c_param);
              return [m](const Matrix& xt) { return m.decision_all(xt); };
            },
            cd.x_train, cd.y_train, cd.x_test, cd.y_test, n_boot, seed, threads);
      } else if (model == "rbf_svm") {
        const double c_param = rc.shallow.svm_c;
        const double gamma = rc.shallow.rbf_gamma;
        b = bootstrap_auc(
            [c_param, gamma, seed](const Matrix& x, const std::vector<int>& y) {
              KernelModel m = train_rbf_svm(x, y, c_param, gamma, mix_seed(seed, 0x5f));
              return [m](const Matrix& xt) { return m.decision_all(xt); };
            },
            cd.x_train, cd.y_train, cd.x_test, cd.y_test, n_boot, seed, threads);
      } else {
        ForestConfig fc = rc.shallow.forest;
        fc.threads = 1;  // instances already run concurrently
        b = bootstrap_auc(
            [fc, seed](const Matrix& x, const std::vector<int>& y) {
              ForestConfig local = fc;
              local.seed = mix_seed(seed, 0xf0);
              Forest f = train_random_forest(x, y, local);
              return [f = std::move(f)](const Matrix& xt) { return f.predict_proba(xt); };
            },
            cd.x_train, cd.y_train, cd.x_test, cd.y_test, n_boot, seed, threads);
      }
      (c == 0 ? row.attention : row.random) = std::move(b);
    }
    row.welch = welch_t_test(detail::clean_scores(row.attention), detail::clean_scores(row.random));
    out.rows.push_back(std::move(row));
  }

  std::string csv =
      "model,auc_attention,attention_ci_low,attention_ci_high,auc_random,random_ci_low,"
      "random_ci_high,t,p,skipped_attention,skipped_random\n";
  std::string scores = "model,condition,instance,auc,skipped\n";
  for (const auto& row : out.rows) {
    csv += detail::csv_row({row.model, format_double(row.attention.mean),
                            format_double(row.attention.ci_low), format_double(row.attention.ci_high),
                            format_double(row.random.mean), format_double(row.random.ci_low),
                            format_double(row.random.ci_high), format_double(row.welch.t),
                            format_double(row.welch.p), std::to_string(row.attention.skipped),
                            std::to_string(row.random.skipped)});
    for (int c = 0; c < 2; ++c) {
      const BootstrapResult& b = c == 0 ? row.attention : row.random;
      for (std::size_t i = 0; i < b.scores.size(); ++i) {
        const bool skip = b.scores[i] < 0;
        scores += detail::csv_row({row.model, c == 0 ? "attention" : "random", std::to_string(i),
                                   skip ? "" : format_double(b.scores[i]), skip ? "1" : "0"});
      }
    }
  }
  detail::write_text_file(paths.auc_results(), csv);
  detail::write_text_file(paths.auc_scores(), scores);
  return out;
}

// ---------------------------------------------------------------------------
// plot

/// Renders one answer's attention curve with the exact draws and slices the
/// extraction stage used, and returns the artifact path.
inline std::string cmd_plot_answer(const RunConfig& rc, const Corpus& corpus,
                                   const Ensemble& ens, const std::string& answer_id) {
  detail::prepare_run_dir(rc);
  const Answer* a = corpus.find(answer_id);
  if (!a) throw DataError("answer '" + answer_id + "' not found in the corpus");
  const Vec curve = attention_profile(ens, a->frames);
  PeakConfig local = rc.peaks;
  local.seed = mix_seed(rc.peaks.seed, hash_string(answer_id));
  Rng rng(local.seed);
  const std::vector<int> draws = sample_timesteps(curve, local.n_draws, rng);
  const std::vector<Slice> slices = extract_slices_for_answer(curve, answer_id, rc.peaks);
  const std::string path = run_paths(rc).answer_plot(answer_id);
  detail::write_text_file(path, render_answer_plot(curve, draws, slices, answer_id));
  return path;
}

// ---------------------------------------------------------------------------
// report

namespace detail {

inline std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing artifact: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw DataError("empty artifact: " + path);
  return rows;
}

inline std::string markdown_table(const std::vector<std::vector<std::string>>& rows,
                                  std::size_t max_rows = 0) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (max_rows && i > max_rows) {
      out += "| ... |\n";
      break;
    }
    out += "|";
    for (const auto& c : rows[i]) out += " " + c + " |";
    out += "\n";
    if (i == 0) {
      out += "|";
      for (std::size_t j = 0; j < rows[0].size(); ++j) out += " --- |";
      out += "\n";
    }
  }
  return out;
}

}  // namespace detail

/// Summarizes the artifacts already present in the run directory.
inline std::string cmd_report(const RunConfig& rc) {
  detail::prepare_run_dir(rc);
  const RunPaths paths = run_paths(rc);
  std::string md = "# Attention slice run\n\n";
  md += "Artifacts in `" + rc.out_dir + "`; seed " + std::to_string(rc.seed) + ".\n\n";

  md += "## Peak coverage\n\n";
  md += detail::markdown_table(detail::read_csv_file(paths.peak_rates()));
  md += "\n## Encoder ensemble\n\n";
  md += detail::markdown_table(detail::read_csv_file(paths.train_metrics()));
  md += "\n## Slice kind classification\n\n";
  md += detail::markdown_table(detail::read_csv_file(paths.kind_results()));
  md += "\n## Lasso importances (top 10)\n\n";
  md += detail::markdown_table(detail::read_csv_file(paths.lasso_importance_csv()), 10);

  const auto boruta = detail::read_csv_file(paths.boruta_csv());
  int confirmed = 0, tentative = 0, rejected = 0;
  for (std::size_t i = 1; i < boruta.size(); ++i) {
    if (boruta[i][1] == "confirmed") ++confirmed;
    else if (boruta[i][1] == "tentative") ++tentative;
    else ++rejected;
  }
  md += "\n## Boruta\n\n";
  md += std::to_string(confirmed) + " confirmed, " + std::to_string(tentative) + " tentative, " +
        std::to_string(rejected) + " rejected; confirmed features:\n\n";
  for (std::size_t i = 1; i < boruta.size(); ++i)
    if (boruta[i][1] == "confirmed") md += "- " + boruta[i][0] + " (" + boruta[i][2] + " hits)\n";

  const auto tt = detail::read_csv_file(paths.feature_ttests());
  int significant = 0;
  for (std::size_t i = 1; i < tt.size(); ++i) significant += tt[i][5] == "1" ? 1 : 0;
  md += "\n## Feature t-tests\n\n";
  md += std::to_string(significant) + " of " + std::to_string(tt.size() - 1) +
        " features separate attention from random slices on the test split.\n";

  md += "\n## Hirability AUC, attention vs random slices\n\n";
  md += detail::markdown_table(detail::read_csv_file(paths.auc_results()));

  detail::write_text_file(paths.report(), md);
  return md;
}

}  // namespace attnslice

#endif  // ATTNSLICE_PIPELINE_HPP
