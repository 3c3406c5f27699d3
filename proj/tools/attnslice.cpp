// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Verbs mirror the pipeline stages; every verb
// reads the artifacts it needs from the run directory, so stages can be
// rerun independently. Exit codes: 0 ok, 2 config error, 3 data error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "attnslice/pipeline.hpp"

namespace {

using namespace attnslice;

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string answer_id;  // plot only
};

RunConfig resolve_config(const CliArgs& args) {
  RunConfig rc = args.config_path.empty() ? [&] {
    RunConfig d;
    if (args.seed) {
      d.seed = *args.seed;
      d.derive_seeds(false, false, false, false);
    }
    d.validate();
    return d;
  }()
                                          : load_run_config(args.config_path, args.seed);
  if (!args.out_dir.empty()) rc.out_dir = args.out_dir;
  return rc;
}

Corpus need_corpus(const RunConfig& rc) { return load_corpus(run_paths(rc).corpus()); }

Ensemble need_ensemble(const RunConfig& rc) { return load_ensemble(run_paths(rc).ensemble()); }

SliceDataset need_dataset(const RunConfig& rc) {
  return load_slice_dataset(run_paths(rc).slice_dataset());
}

int run(const std::string& verb, const CliArgs& args) {
  const RunConfig rc = resolve_config(args);
  const RunPaths paths = run_paths(rc);
  if (verb == "generate") {
    const Corpus corpus = cmd_generate(rc);
    std::printf("wrote %s (%zu answers)\n", paths.corpus().c_str(), corpus.answers.size());
  } else if (verb == "train") {
    const Corpus corpus = need_corpus(rc);
    const EnsembleResult res = cmd_train(rc, corpus);
    std::printf("wrote %s (%zu members), metrics in %s\n", paths.ensemble().c_str(),
                res.ensemble.size(), paths.train_metrics().c_str());
  } else if (verb == "extract") {
    const Corpus corpus = need_corpus(rc);
    const Ensemble ens = need_ensemble(rc);
    const SliceDataset ds = cmd_extract(rc, corpus, ens);
    std::printf("wrote %s (%zu rows, %d answers without peaks)\n",
                paths.slice_dataset().c_str(), ds.rows.size(), ds.skipped_answers);
  } else if (verb == "classify-kind") {
    const KindResults res = cmd_classify_kind(rc, need_dataset(rc));
    for (const auto& row : res.rows)
      std::printf("%-14s mean F1 %.4f\n", row.model.c_str(), row.test.mean_f1);
    std::printf("wrote %s\n", paths.kind_results().c_str());
  } else if (verb == "compare-auc") {
    const AucComparison res = cmd_compare_auc(rc, need_dataset(rc));
    for (const auto& row : res.rows)
      std::printf("%-11s attention %.4f random %.4f p %.3g\n", row.model.c_str(),
                  row.attention.mean, row.random.mean, row.welch.p);
    std::printf("wrote %s\n", paths.auc_results().c_str());
  } else if (verb == "plot") {
    const Corpus corpus = need_corpus(rc);
    const Ensemble ens = need_ensemble(rc);
    std::string id = args.answer_id;
    if (id.empty()) {
      // default to the first answer that yields any slice
      for (const Answer& a : corpus.answers) {
        if (!extract_slices_for_answer(ens, a, rc.peaks).empty()) {
          id = a.answer_id;
          break;
        }
      }
      if (id.empty()) throw DataError("no answer in the corpus yields a slice to plot");
    }
    std::printf("wrote %s\n", cmd_plot_answer(rc, corpus, ens, id).c_str());
  } else if (verb == "report") {
    cmd_report(rc);
    std::printf("wrote %s\n", paths.report().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-slice experiment pipeline"};
  app.require_subcommand(1);

  CliArgs args;
  std::uint64_t seed_value = 0;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "config JSON; defaults apply when omitted");
    sub->add_option("--out", args.out_dir, "run directory (overrides config out_dir)");
    sub->add_option("--seed", seed_value, "global seed (overrides config seed)")
        ->each([&](const std::string&) { args.seed = seed_value; });
  };
  for (const char* verb :
       {"generate", "train", "extract", "classify-kind", "compare-auc", "plot", "report"})
    add_common(app.add_subcommand(verb));
  app.get_subcommand("plot")->add_option("--answer", args.answer_id,
                                         "answer id (default: first answer with a slice)");

  try {
    app.parse(argc, argv);
    return run(app.get_subcommands().front()->get_name(), args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const attnslice::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const attnslice::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
