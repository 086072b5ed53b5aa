/*
 * Copyright 2026 The Antidote Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "antidote/experiment.hpp"

namespace antidote::cli {

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

ExperimentConfig load_config(const GlobalFlags& g) {
  auto cfg = ExperimentConfig::read(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.out) cfg.output_dir = *g.out;
  return cfg;
}

void print_counts(std::ostream& out, const PairSummary& s) {
  out << fmt::format("{:<6} {:>8} {:>10} {:>10}\n", "split", "rows", "positive", "negative");
  out << fmt::format("{:<6} {:>8} {:>10} {:>10}\n", "train", s.train_rows, s.train.positive_differing,
                     s.train.negative_differing);
  if (s.test) {
    out << fmt::format("{:<6} {:>8} {:>10} {:>10}\n", "test", s.test_rows, s.test->positive_differing,
                       s.test->negative_differing);
  }
  out << fmt::format("all comparable pairs: train {}/{}", s.train.positive, s.train.negative);
  if (s.test) out << fmt::format(", test {}/{}", s.test->positive, s.test->negative);
  out << "\n";
}

void print_outcomes(std::ostream& out, const std::vector<RegimeOutcome>& outcomes) {
  out << fmt::format("{:<22} {:>7} {:>7} {:>9} {:>9} {:>9} {:>9}\n", "regime", "roc", "ap", "pos_mean", "pos_q3",
                     "neg_mean", "neg_q3");
  for (const auto& o : outcomes) {
    if (!o.ok) {
      out << fmt::format("{:<22} failed: {}\n", o.spec.name(), o.error);
      continue;
    }
    const auto& h = o.report.comp.headline;
    auto cell = [](const std::optional<GapStats>& g, bool q3) {
      return g ? fmt::format("{:9.3f}", q3 ? g->q3 : g->mean) : fmt::format("{:>9}", "n/a");
    };
    out << fmt::format("{:<22} {:7.3f} {:7.3f} {} {} {} {}\n", o.spec.name(), o.report.roc, o.report.ap,
                       cell(h.positive, false), cell(h.positive, true), cell(h.negative, false),
                       cell(h.negative, true));
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Antidote data generation and individual fairness experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "antidote 1.0.0");

  GlobalFlags g;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  app.add_option("--config", g.config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Root seed overriding the configuration");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory overriding the configuration");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  auto* pairs = app.add_subcommand("pairs", "Mine comparable pairs and print their counts");
  auto* train = app.add_subcommand("train-generator", "Train the antidote generator and write a bundle");
  auto* sample = app.add_subcommand("sample", "Sample antidote rows from a trained bundle");
  std::string bundle;
  std::optional<double> percentage;
  sample->add_option("--bundle", bundle, "Generator bundle (defaults to the configured one)");
  sample->add_option("--percentage", percentage, "Target antidote size in percent of the training rows")
      ->check(CLI::NonNegativeNumber);
  auto* experiment = app.add_subcommand("experiment", "Train and evaluate every configured regime");
  auto* tradeoff = app.add_subcommand("tradeoff", "Sweep the antidote percentage");
  std::vector<double> sweep;
  tradeoff->add_option("--percentages", sweep, "Antidote percentages to evaluate")->delimiter(',');

  for (auto* sub : {pairs, train, sample, experiment, tradeoff}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  set_log_quiet(quiet);
  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;
  if (*out_opt) g.out = out_dir;

  try {
    auto cfg = load_config(g);
    if (pairs->parsed()) {
      print_counts(out, cmd_pairs(cfg));
    } else if (train->parsed()) {
      const auto b = cmd_train_generator(cfg);
      const auto& last = b.model.trace.back();
      out << fmt::format("bundle {}\nfinal ratios: sensitive {:.4f} discrete {:.4f} continuous {:.4f} all {:.4f}\n",
                         cfg.resolved_bundle().string(), last.sensitive, last.discrete, last.continuous, last.all);
    } else if (sample->parsed()) {
      if (percentage) cfg.sampling.target_percentage = *percentage;
      const auto r = cmd_sample(cfg, bundle.empty() ? cfg.resolved_bundle() : std::filesystem::path(bundle));
      out << fmt::format("{} antidote rows after {} iterations{}\n", r.set.source.size(), r.iterations,
                         r.reached_target ? "" : " (target not reached)");
    } else if (experiment->parsed()) {
      const auto outcomes = cmd_experiment(cfg);
      print_outcomes(out, outcomes);
      for (const auto& o : outcomes)
        if (!o.ok) return kExitRuntime;
    } else if (tradeoff->parsed()) {
      if (!sweep.empty()) cfg.tradeoff_percentages = sweep;
      const auto rows = cmd_tradeoff(cfg);
      out << tradeoff_csv(rows);
      for (const auto& r : rows)
        if (!r.ok) return kExitRuntime;
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace antidote::cli
