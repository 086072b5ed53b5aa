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

#ifndef ANTIDOTE_CLASSIFIER_HPP_
#define ANTIDOTE_CLASSIFIER_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "antidote/binary_io.hpp"
#include "antidote/comparability.hpp"
#include "antidote/dataset.hpp"
#include "antidote/gan.hpp"
#include "antidote/nn/layers.hpp"

namespace antidote {

enum class ClassifierKind : std::uint8_t { kLogReg = 0, kNeuralNet = 1 };

const char* classifier_name(ClassifierKind kind);
ClassifierKind parse_classifier(std::string_view name);  // throws ConfigError

struct LogRegOptions {
  double l2 = 1.0;  // penalty 0.5 * l2 * |w|^2, intercept excluded
  int max_iterations = 2048;
  double tolerance = 1e-6;  // gradient norm
};

struct NeuralNetOptions {
  std::vector<int> hidden{100, 100};
  int iterations = 10000;
  int batch_size = 256;
  double learning_rate = 0.1;
  double weight_decay = 1e-2;
  long halve_every = 2500;
};

// Binary classifier over the classifier view of an EncodedDataset: optional
// removal of the sensitive block, then standardisation with the statistics of
// the original training rows.
class ClassifierModel {
 public:
  ClassifierKind kind() const { return kind_; }
  bool drops_sensitive() const { return drop_sensitive_; }

  // Positive-class probabilities.
  Vector predict(const EncodedDataset& data) const;
  Vector predict_features(const Matrix& standardized) const;
  Matrix features(const EncodedDataset& data) const;

  const Vector& lr_weights() const { return lr_weights_; }
  double lr_intercept() const { return lr_intercept_; }

  void save(ByteWriter& w) const;
  static ClassifierModel load(ByteReader& r);

  // Mean logistic loss and the gradient norm of the regularised objective
  // (logistic regression only).
  double lr_gradient_norm(const Matrix& x, const std::vector<int>& y, double l2) const;

 private:
  friend ClassifierModel train_logreg(const Matrix&, const std::vector<int>&, const LogRegOptions&);
  friend ClassifierModel train_nn(const Matrix&, const std::vector<int>&, const NeuralNetOptions&,
                                  std::uint64_t, const struct CandidateIndex*, int);
  friend ClassifierModel train_regime(const struct RegimeConfig&, const EncodedDataset&,
                                      const AntidoteSet*, std::uint64_t);

  ClassifierKind kind_ = ClassifierKind::kLogReg;
  bool drop_sensitive_ = false;
  Standardizer standardizer_;
  bool standardize_ = false;
  Vector lr_weights_;
  double lr_intercept_ = 0.0;
  std::vector<int> net_hidden_;
  std::shared_ptr<nn::Sequential<double>> net_;
};

// Deterministic Newton iterations with backtracking on already standardised
// features.
ClassifierModel train_logreg(const Matrix& x, const std::vector<int>& y, const LogRegOptions& options);

// Per-row AntiDRO candidates: rows of `candidates` belonging to each row of
// the training matrix.
struct CandidateIndex {
  Matrix candidates;                              // standardised antidote rows
  std::vector<std::vector<std::size_t>> by_row;  // training row -> candidate rows
};

// Minibatch SGD on the mean logistic loss. With a candidate index, every step
// adds, for each batch row with candidates, the largest candidate loss.
ClassifierModel train_nn(const Matrix& x, const std::vector<int>& y, const NeuralNetOptions& options,
                         std::uint64_t seed, const CandidateIndex* candidates = nullptr,
                         int max_candidates = 0);

enum class Regime : std::uint8_t {
  kBase,
  kDis,
  kAnti,
  kAntiDis,
  kAntiDro,
  kAntiOnly,
  kRandomComparable,
};

const char* regime_name(Regime r);
Regime parse_regime(std::string_view name);  // throws ConfigError

struct RegimeConfig {
  Regime regime = Regime::kBase;
  ClassifierKind kind = ClassifierKind::kLogReg;
  LogRegOptions logreg;
  NeuralNetOptions nn;
  int max_candidates = 0;  // AntiDRO cap M; 0 keeps every candidate

  void validate() const;  // throws ConfigError
};

// Trains one regime. `extra` holds antidote rows (anti regimes, AntiDRO,
// anti-only) or random comparable rows (random-comparable); labels are the
// copied source labels.
ClassifierModel train_regime(const RegimeConfig& cfg, const EncodedDataset& train, const AntidoteSet* extra,
                             std::uint64_t seed);

// Uniform random comparable rows around uniformly drawn source rows: up to
// T_d discrete features resampled, continuous features jittered within T_c,
// and a non-empty subset of sensitive features moved to other values.
AntidoteSet random_comparable(const EncodedDataset& data, const ComparabilityConfig& cfg, std::size_t count,
                              Rng& rng);

// Rows with every feature drawn uniformly and a uniform random label.
EncodedDataset uniform_random_rows(const EncodedDataset& like, std::size_t count, Rng& rng);

}  // namespace antidote

#endif  // ANTIDOTE_CLASSIFIER_HPP_
