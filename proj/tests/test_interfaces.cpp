// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Config parsing, SVG rendering, and pipeline stage contracts.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "attnslice/config.hpp"
#include "attnslice/pipeline.hpp"
#include "attnslice/svg.hpp"

using namespace attnslice;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0, at = 0;
  while ((at = hay.find(needle, at)) != std::string::npos) {
    ++n;
    at += needle.size();
  }
  return n;
}

/// Scratch directory unique to this test binary run.
std::string fresh_dir(const std::string& tag) {
  const std::string dir =
      (std::filesystem::temp_directory_path() / ("attnslice_test_" + tag)).string();
  std::filesystem::remove_all(dir);
  return dir;
}

/// A hand-built slice dataset over two channels: attention rows carry a
/// strong positive mean on the first channel, random rows sit at zero, and
/// the hirability label tracks a second direction so both tasks are
/// learnable. Rows follow the builder's ordering contract: sorted by answer
/// id, attention row first.
SliceDataset synthetic_dataset(int n_answers, bool constant_features, std::uint64_t seed) {
  SliceDataset ds;
  ds.feature_names = slice_feature_names(ChannelSchema::from_names({"AU12_r", "AU20_r"}));
  Rng rng(seed);
  for (int i = 0; i < n_answers; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "a%05d", i);
    const Split split = i % 10 < 7 ? Split::train : (i % 10 == 7 ? Split::validation : Split::test);
    const int hirability = i % 2;
    for (int k = 0; k < 5; ++k) {
      SliceRow row;
      row.answer_id = id;
      row.split = split;
      row.kind_label = k == 0 ? 1 : 0;
      row.hirability_label = hirability;
      row.slice.kind = k == 0 ? SliceKind::attention : SliceKind::random;
      row.slice.answer_id = id;
      row.slice.start_idx = 4 * k;
      row.slice.end_idx = 4 * k + 3;
      row.slice.amplitude = k == 0 ? 0.5 : 0.1;
      row.features.assign(ds.feature_names.size(), 0.0);
      if (!constant_features) {
        for (double& f : row.features) f = 0.3 * rng.normal();
        row.features[0] += k == 0 ? 2.0 : 0.0;                        // kind signal
        row.features[3] += (k == 0 && hirability) ? 2.0 : 0.0;        // hirability signal
      }
      ds.rows.push_back(std::move(row));
    }
  }
  return ds;
}

RunConfig tiny_config(const std::string& dir) {
  RunConfig rc;
  rc.out_dir = dir;
  rc.generator.n_answers = 30;
  rc.generator.t_min = 20;
  rc.generator.t_max = 40;
  rc.shallow.threads = 1;
  rc.shallow.bootstrap_instances = 20;
  rc.shallow.forest.n_trees = 25;
  rc.shallow.boruta_iters = 5;
  rc.derive_seeds(false, false, false, false);
  rc.validate();
  return rc;
}

}  // namespace

TEST_CASE("config documents parse strictly and round-trip") {
  SECTION("empty document gives the defaults with derived stage seeds") {
    const RunConfig rc = parse_run_config("{}");
    CHECK(rc.seed == 42);
    CHECK(rc.generator.n_answers == 2000);
    CHECK(rc.train.ensemble_size == 5);
    CHECK(rc.peaks.n_draws == 2048);
    CHECK(rc.generator.seed == mix_seed(42, 0x67656e));
    CHECK(rc.train.seed == mix_seed(42, 0x747261));
    CHECK(rc.peaks.seed == mix_seed(42, 0x70656b));
    CHECK(rc.shallow.seed == mix_seed(42, 0x736861));
    CHECK(rc.shallow.forest.seed == mix_seed(rc.shallow.seed, 0x666f72));
  }
  SECTION("explicit stage seeds are kept, the rest follow the global seed") {
    const RunConfig rc = parse_run_config(R"({"seed": 7, "train": {"seed": 123}})");
    CHECK(rc.train.seed == 123);
    CHECK(rc.generator.seed == mix_seed(7, 0x67656e));
  }
  SECTION("a seed override replaces the global seed before derivation") {
    const RunConfig rc = parse_run_config(R"({"seed": 7, "train": {"seed": 123}})", 99);
    CHECK(rc.seed == 99);
    CHECK(rc.train.seed == 123);
    CHECK(rc.generator.seed == mix_seed(99, 0x67656e));
  }
  SECTION("unknown keys fail with their full path") {
    CHECK_THROWS_WITH(parse_run_config(R"({"generator": {"n_answer": 5}})"),
                      ContainsSubstring("generator.n_answer"));
    CHECK_THROWS_WITH(parse_run_config(R"({"shallow": {"forest": {"trees": 5}}})"),
                      ContainsSubstring("shallow.forest.trees"));
    CHECK_THROWS_WITH(parse_run_config(R"({"bogus": 1})"), ContainsSubstring("bogus"));
  }
  SECTION("type and range errors name the offending key") {
    CHECK_THROWS_WITH(parse_run_config(R"({"train": {"learning_rate": "fast"}})"),
                      ContainsSubstring("train.learning_rate"));
    CHECK_THROWS_AS(parse_run_config(R"({"generator": {"event_rate": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[1,2]"), ConfigError);
  }
  SECTION("custom events parse and validate") {
    const RunConfig rc = parse_run_config(
        R"({"generator": {"events": [
              {"kind": "wink", "positive": true, "offsets": {"AU45_c": 1.5}}]}})");
    REQUIRE(rc.generator.events.size() == 1);
    CHECK(rc.generator.events[0].kind == "wink");
    CHECK(rc.generator.events[0].positive);
    CHECK(rc.generator.events[0].channel_offsets[0].first == "AU45_c");
    CHECK_THROWS_WITH(
        parse_run_config(R"({"generator": {"events": [{"kind": "x", "offsets": {}}]}})"),
        ContainsSubstring("offsets"));
  }
  SECTION("the resolved document is a parsing fixed point") {
    const RunConfig rc = parse_run_config(R"({"seed": 3, "shallow": {"svm_c": 2.5}})");
    const std::string dumped = resolved_config_json(rc).dump(2);
    const RunConfig back = parse_run_config(dumped);
    CHECK(resolved_config_json(back).dump(2) == dumped);
    CHECK(back.shallow.svm_c == 2.5);
    CHECK(back.train.seed == rc.train.seed);
  }
}

TEST_CASE("histograms bin and render") {
  SECTION("fixed-width binning with the maximum folded into the last bin") {
    const Histogram h = make_histogram({0.0, 0.1, 0.24, 0.25, 1.0}, 0.25);
    REQUIRE(h.counts.size() == 5);
    CHECK(h.counts[0] == 3.0);
    CHECK(h.counts[1] == 1.0);
    CHECK(h.counts[4] == 1.0);
    CHECK(make_histogram({}, 0.5).counts.empty());
    CHECK_THROWS_AS(make_histogram({1.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(make_histogram({-0.5}, 0.25), DataError);
  }
  SECTION("bar chart structure") {
    Histogram h;
    h.bin_width = 0.05;
    h.counts = {3, 0, 7};
    const std::string svg = render_histogram(h, "a<b", "x", "count");
    CHECK_THAT(svg, ContainsSubstring("<svg"));
    CHECK_THAT(svg, ContainsSubstring("a&lt;b"));
    // background + one bar per nonzero bin
    CHECK(count_of(svg, "<rect") == 3);
  }
}

TEST_CASE("answer plots carry curve, draws, and slice boxes") {
  Vec curve(20, 0.02);
  curve[10] = 0.4;
  curve[11] = 0.2;
  double total = 0.0;
  for (double v : curve) total += v;
  for (double& v : curve) v /= total;

  std::vector<int> draws = {3, 10, 10, 10, 11, 11, 17};
  Slice s;
  s.start_idx = 10;
  s.end_idx = 11;
  s.amplitude = curve[10];
  const std::string svg = render_answer_plot(curve, draws, {s}, "answer a1");

  CHECK_THAT(svg, ContainsSubstring("polyline"));
  CHECK_THAT(svg, ContainsSubstring("#d62728"));            // curve
  CHECK(count_of(svg, "#1f77b4") == 2);                     // slice box fill + stroke
  CHECK(count_of(svg, "fill=\"#bbbbbb\"") == 4);            // one bar per distinct draw
  CHECK_THAT(svg, ContainsSubstring("answer a1"));
  CHECK_THROWS_AS(render_answer_plot(curve, {25}, {}, "x"), DataError);
}

TEST_CASE("generate stage writes a loadable corpus and the resolved config") {
  const std::string dir = fresh_dir("gen");
  const RunConfig rc = tiny_config(dir);
  const Corpus corpus = cmd_generate(rc);
  CHECK(corpus.answers.size() == 30);

  const Corpus back = load_corpus(run_paths(rc).corpus());
  back.validate();
  CHECK(back.answers.size() == corpus.answers.size());
  CHECK(back.schema.names == corpus.schema.names);

  const RunConfig echoed = load_run_config(run_paths(rc).resolved_config());
  CHECK(resolved_config_json(echoed).dump() == resolved_config_json(rc).dump());
  std::filesystem::remove_all(dir);
}

TEST_CASE("kind classification separates a planted signal and writes artifacts") {
  const std::string dir = fresh_dir("kind");
  RunConfig rc = tiny_config(dir);
  const SliceDataset ds = synthetic_dataset(200, false, 31);

  const KindResults res = cmd_classify_kind(rc, ds);
  REQUIRE(res.rows.size() == 4);
  CHECK(res.rows[0].model == "majority");
  // the 1:4 kind imbalance caps an all-negative baseline at mean F1 4/9
  CHECK_THAT(res.rows[0].test.mean_f1, WithinAbs(4.0 / 9.0, 1e-12));
  for (const auto& row : res.rows) {
    if (row.model == "lasso" || row.model == "forest") CHECK(row.test.mean_f1 > 0.9);
  }

  // top lasso importance is the planted mean feature, mapped to its channel
  REQUIRE(!res.lasso_ranking.empty());
  CHECK(res.lasso_ranking[0].feature == 0);
  const std::string imp = slurp(run_paths(rc).lasso_importance_csv());
  CHECK_THAT(imp, ContainsSubstring("AU12_r_mean,"));
  CHECK_THAT(imp, ContainsSubstring(",AU12_r,lower_face"));

  const std::string tt = slurp(run_paths(rc).feature_ttests());
  CHECK(count_of(tt, "\n") == ds.feature_names.size() + 1);  // header + one row per feature
  CHECK_THAT(tt, ContainsSubstring("AU12_r_mean"));

  const std::string bor = slurp(run_paths(rc).boruta_csv());
  CHECK(count_of(bor, "\n") == ds.feature_names.size() + 1);

  // byte-identical rerun
  const std::string kind_a = slurp(run_paths(rc).kind_results());
  cmd_classify_kind(rc, ds);
  CHECK(slurp(run_paths(rc).kind_results()) == kind_a);
  CHECK(slurp(run_paths(rc).lasso_importance_csv()) == imp);
  std::filesystem::remove_all(dir);
}

TEST_CASE("auc comparison on constant features is exactly chance") {
  const std::string dir = fresh_dir("auc");
  RunConfig rc = tiny_config(dir);
  const SliceDataset ds = synthetic_dataset(120, true, 17);

  const AucComparison res = cmd_compare_auc(rc, ds);
  REQUIRE(res.rows.size() == 4);
  for (const auto& row : res.rows) {
    INFO(row.model);
    CHECK_THAT(row.attention.mean, WithinAbs(0.5, 1e-12));
    CHECK_THAT(row.random.mean, WithinAbs(0.5, 1e-12));
    CHECK_THAT(row.welch.p, WithinAbs(1.0, 1e-12));
    CHECK(row.attention.skipped == 0);
  }

  const std::string scores = slurp(run_paths(rc).auc_scores());
  // 4 models x 2 conditions x bootstrap_instances rows + header
  CHECK(count_of(scores, "\n") ==
        4 * 2 * static_cast<std::size_t>(rc.shallow.bootstrap_instances) + 1);

  const std::string results_a = slurp(run_paths(rc).auc_results());
  cmd_compare_auc(rc, ds);
  CHECK(slurp(run_paths(rc).auc_results()) == results_a);
  std::filesystem::remove_all(dir);
}

TEST_CASE("report summarizes the artifacts it finds and fails when they are missing") {
  const std::string dir = fresh_dir("report");
  RunConfig rc = tiny_config(dir);
  CHECK_THROWS_AS(cmd_report(rc), DataError);

  // classify/auc artifacts alone are not enough; the report wants the whole run
  const SliceDataset ds = synthetic_dataset(150, false, 23);
  cmd_classify_kind(rc, ds);
  cmd_compare_auc(rc, ds);
  CHECK_THROWS_AS(cmd_report(rc), DataError);

  // fabricate the remaining stage summaries
  detail::write_text_file(run_paths(rc).peak_rates(), "split,n_answers,with_peaks,rate\noverall,10,9,0.9\n");
  detail::write_text_file(run_paths(rc).train_metrics(),
                          "model,best_epoch,val_mean_f1,test_mean_f1,test_auc\nensemble,,0.7,0.7,0.8\n");
  const std::string md = cmd_report(rc);
  CHECK_THAT(md, ContainsSubstring("## Peak coverage"));
  CHECK_THAT(md, ContainsSubstring("## Slice kind classification"));
  CHECK_THAT(md, ContainsSubstring("## Hirability AUC"));
  CHECK_THAT(md, ContainsSubstring("| lasso |"));
  CHECK(slurp(run_paths(rc).report()) == md);
  std::filesystem::remove_all(dir);
}
