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

#ifndef ANTIDOTE_GAN_HPP_
#define ANTIDOTE_GAN_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "antidote/comparability.hpp"
#include "antidote/gan_nets.hpp"
#include "antidote/schema.hpp"

namespace antidote {

struct GanHyperparams {
  double lr_generator = 2e-4;
  double lr_discriminator = 2e-4;
  double weight_decay_generator = 1e-6;
  double weight_decay_discriminator = 0.0;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;
  int batch_size = 4096;
  int epochs = 500;
  double temperature = 0.2;
  int noise_dim = 128;
  double gradient_penalty = 10.0;
  int discriminator_steps = 1;  // critic updates per generator update
  int trace_rows = 2000;        // pairs scored for the per-epoch trace
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Per-epoch fraction of generations that match the requested sensitive
// values, keep the discrete features within T_d, keep every continuous gap
// within T_c, and satisfy all three.
struct TraceRow {
  int epoch = 0;
  double sensitive = 0.0;
  double discrete = 0.0;
  double continuous = 0.0;
  double all = 0.0;
  double generator_loss = 0.0;
  double discriminator_loss = 0.0;
};

std::string trace_to_csv(const std::vector<TraceRow>& trace);

struct TrainedGenerator {
  ReRepresentation rep;
  Generator<float> generator;
  Discriminator<float> discriminator;
  GanHyperparams hp;
  std::vector<TraceRow> trace;
};

using EpochCallback = std::function<void(const TraceRow&)>;

// Adversarial training over ordered comparable pairs (x, x'): the generator
// is conditioned on x~ and the sensitive values of x' and scored by the
// critic against x'. Each epoch visits every pair once in random order with a
// random orientation. Throws ContractViolation for an empty pair list.
TrainedGenerator train_generator(const EncodedDataset& train, const std::vector<ComparablePair>& pairs,
                                 const ReRepresentation& rep, const GanHyperparams& hp,
                                 const ComparabilityConfig& cfg, const EpochCallback& on_epoch = {});

// Sensitive value combinations in mixed-radix order (first feature slowest).
std::vector<std::vector<int>> sensitive_combinations(const std::vector<int>& sizes);
int combination_index(const std::vector<int>& codes, const std::vector<int>& sizes);

struct RawGeneration {
  EncodedDataset rows;              // synthetic split, labels copied from sources
  std::vector<std::size_t> source;  // source row per generation
  std::vector<int> requested;       // requested sensitive combination index
};

// For every iteration, every source row and every sensitive combination other
// than the row's own: one generated row. Deterministic given `seed`.
RawGeneration sample_raw(TrainedGenerator& model, const EncodedDataset& data, int iterations,
                         std::uint64_t seed, int chunk_rows = 4096);

using AntidoteSet = RawGeneration;

// Keeps generations comparable with their sources (and, when requested,
// carrying exactly the requested sensitive values).
AntidoteSet post_filter(const RawGeneration& raw, const EncodedDataset& data, const ComparabilityConfig& cfg,
                        bool require_requested_sensitive);

AntidoteSet empty_antidote_set(const EncodedDataset& like);
AntidoteSet concat_antidotes(const AntidoteSet& a, const AntidoteSet& b);
AntidoteSet select_antidotes(const AntidoteSet& set, const std::vector<std::size_t>& rows);

// Antidote rows as a percentage of the training rows.
double antidote_percentage(const AntidoteSet& set, std::size_t train_rows);

struct SampleOptions {
  double target_percentage = 45.25;
  int max_iterations = 50;
  bool require_requested_sensitive = false;
  std::uint64_t seed = 0;
};

struct SampleResult {
  AntidoteSet set;
  int iterations = 0;
  bool reached_target = false;
};

// Repeats sample_raw + post_filter until ceil(target% x rows) antidotes exist
// (or the iteration cap), then keeps a uniform random subset of that size.
SampleResult sample_antidotes(TrainedGenerator& model, const EncodedDataset& train,
                              const ComparabilityConfig& cfg, const SampleOptions& options);

// CSV with source_index, requested_<sensitive>..., label, then every feature
// by schema name (continuous on the [0,1] view, categories by value).
std::string antidote_to_csv(const AntidoteSet& set, const FeatureSchema& schema);

}  // namespace antidote

#endif  // ANTIDOTE_GAN_HPP_
