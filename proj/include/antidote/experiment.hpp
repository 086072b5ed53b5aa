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

#ifndef ANTIDOTE_EXPERIMENT_HPP_
#define ANTIDOTE_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "antidote/bundle.hpp"
#include "antidote/classifier.hpp"
#include "antidote/gan.hpp"
#include "antidote/gmm.hpp"
#include "antidote/metrics.hpp"

namespace antidote {

inline constexpr const char* kDataDirEnv = "ANTIDOTE_DATA_DIR";

struct RegimeSpec {
  ClassifierKind kind = ClassifierKind::kLogReg;
  Regime regime = Regime::kBase;

  std::string name() const;  // e.g. "lr:anti"
  static RegimeSpec parse(std::string_view text);  // throws ConfigError
  bool operator==(const RegimeSpec&) const = default;
};

struct ExperimentConfig {
  std::filesystem::path schema_path;
  std::filesystem::path train_path;
  std::filesystem::path test_path;  // optional
  std::filesystem::path output_dir = "out";
  std::filesystem::path bundle_path;  // empty: <output_dir>/generator.bundle

  ComparabilityConfig comparability;
  GmmOptions gmm;
  GanHyperparams gan;
  SampleOptions sampling;
  RegimeConfig classifier;  // hyperparameters shared by every regime
  std::vector<RegimeSpec> regimes;
  int repetitions = 5;
  double random_percentage = 500.0;
  // Antidote size for antidro regimes; defaults to the sampling target.
  double antidro_percentage = 45.25;
  std::vector<double> tradeoff_percentages{0, 45, 90, 135, 180};
  std::vector<RegimeSpec> tradeoff_regimes;
  std::uint64_t seed = 0;
  int threads = 1;

  // Reads a key-value config. Relative schema paths resolve against the
  // config file; relative data paths against `data_dir`, else the
  // ANTIDOTE_DATA_DIR environment variable, else the config directory.
  static ExperimentConfig read(const std::filesystem::path& path);
  static ExperimentConfig parse(std::string_view text, const std::filesystem::path& base_dir,
                                std::string origin = "<config>");

  // Range checks and file existence; throws ConfigError.
  void validate() const;
  std::filesystem::path resolved_bundle() const;
};

struct PreparedData {
  FeatureSchema schema;
  ScalingStats scaling;
  EncodedDataset train;
  std::optional<EncodedDataset> test;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct PairSummary {
  PairCounts train;
  std::optional<PairCounts> test;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

// Pair CSVs for both splits plus a count table.
PairSummary cmd_pairs(const ExperimentConfig& cfg);

ArtifactBundle cmd_train_generator(const ExperimentConfig& cfg);

SampleResult cmd_sample(const ExperimentConfig& cfg, const std::filesystem::path& bundle_path);

struct RegimeOutcome {
  RegimeSpec spec;
  bool ok = false;
  std::string error;
  FairnessReport report;                 // averaged over repetitions
  std::vector<FairnessReport> per_seed;  // one per repetition
};

// Trains and scores one regime for every repetition. `antidote` feeds anti
// regimes; random comparable rows are drawn here when needed.
RegimeOutcome run_regime(const RegimeSpec& spec, const RegimeConfig& base_cfg, const PreparedData& data,
                         const std::vector<ComparablePair>& test_pairs, const AntidoteSet* antidote,
                         const ComparabilityConfig& comparability, double random_percentage, int repetitions,
                         std::uint64_t seed, int threads = 1);

std::vector<RegimeOutcome> cmd_experiment(const ExperimentConfig& cfg);

struct TradeoffRow {
  double percentage = 0.0;
  RegimeSpec spec;
  bool ok = false;
  double roc = 0.0;
  double pos_mean = 0.0;
  double neg_mean = 0.0;
  double pos_mean_variance = 0.0;  // across repetitions
};

std::vector<TradeoffRow> cmd_tradeoff(const ExperimentConfig& cfg);

// Signed percent change of every metric against the base regime of the same
// classifier, as CSV.
std::string delta_table_csv(const std::vector<RegimeOutcome>& outcomes);
std::string tradeoff_csv(const std::vector<TradeoffRow>& rows);

}  // namespace antidote

#endif  // ANTIDOTE_EXPERIMENT_HPP_
