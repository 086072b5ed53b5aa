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

#ifndef ANTIDOTE_GMM_HPP_
#define ANTIDOTE_GMM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "antidote/common.hpp"
#include "antidote/dataset.hpp"

namespace antidote {

// One-dimensional Gaussian mixture for a continuous column.
struct ColumnGMM {
  int column = 0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;

  int modes() const { return static_cast<int>(weights.size()); }
  void validate(int max_modes = 1 << 30) const;  // throws ContractViolation

  bool operator==(const ColumnGMM&) const = default;
};

struct GmmOptions {
  int max_modes = 10;
  // Symmetric Dirichlet concentration on the weights. Values below one favour
  // sparse mixtures; components whose weight collapses are pruned.
  double weight_concentration = 1e-3;
  double prune_weight = 1e-3;
  double std_floor = 1e-4;
  int max_iterations = 300;
  double tolerance = 1e-9;
};

// Per-iteration variational lower bound (up to a constant) and plug-in data
// log-likelihood. `pruned[i]` marks iterations after which a component was
// removed; objective[i + 1] >= objective[i] whenever pruned[i] is false.
struct GmmFitTrace {
  std::vector<double> objective;
  std::vector<double> log_likelihood;
  std::vector<bool> pruned;
};

ColumnGMM fit_gmm(std::span<const double> values, const GmmOptions& options, std::uint64_t seed,
                  int column = 0, GmmFitTrace* trace = nullptr);

double gmm_log_likelihood(std::span<const double> values, const ColumnGMM& gmm);

// Posterior mode probabilities w_k N(c; mu_k, sigma_k^2), normalized.
std::vector<double> mode_probs(double value, const ColumnGMM& gmm);

struct ModeCode {
  double v = 0.0;
  std::vector<double> e;  // one-hot mode indicator

  int mode() const;  // throws ContractViolation unless e is one-hot
};

// Mode drawn from mode_probs; v = (c - mu_k) / (4 sigma_k) clipped to [-1,1].
ModeCode encode_continuous(double value, const ColumnGMM& gmm, Rng& rng);
// Deterministic variant: most probable mode.
ModeCode encode_continuous_argmax(double value, const ColumnGMM& gmm);
ModeCode encode_with_mode(double value, const ColumnGMM& gmm, int mode);

// v * 4 sigma_k + mu_k, before and after clipping to [0,1].
double decode_continuous_unclipped(const ModeCode& code, const ColumnGMM& gmm);
double decode_continuous(const ModeCode& code, const ColumnGMM& gmm);

enum class SliceKind : std::uint8_t { kValue, kMode, kDiscrete, kSensitive };

struct Slice {
  SliceKind kind;
  int feature;  // index within its block
  int offset;
  int width;
};

// Layout of (v_1 e_1 ... v_Nc e_Nc) d s.
class ReRepresentation {
 public:
  ReRepresentation() = default;
  ReRepresentation(std::vector<ColumnGMM> gmms, std::vector<int> discrete_sizes,
                   std::vector<int> sensitive_sizes);

  static ReRepresentation fit(const EncodedDataset& train, const GmmOptions& options,
                              std::uint64_t seed);

  int width() const { return width_; }
  const std::vector<Slice>& slices() const { return slices_; }
  const std::vector<ColumnGMM>& gmms() const { return gmms_; }
  const std::vector<int>& discrete_sizes() const { return discrete_sizes_; }
  const std::vector<int>& sensitive_sizes() const { return sensitive_sizes_; }
  int sensitive_offset() const { return sensitive_offset_; }
  int sensitive_width() const { return width_ - sensitive_offset_; }

  // One row; mode sampled from rng, or argmax when rng is null.
  Eigen::RowVectorXd encode_row(const EncodedDataset& data, std::size_t row, Rng* rng) const;
  Matrix encode(const EncodedDataset& data, Rng* rng) const;

  // Decodes rows back to the encoded-dataset form: continuous via the mixture
  // (argmax of the mode slice), discrete/sensitive via one-hot argmax.
  EncodedDataset decode(const Matrix& rows, const std::vector<int>& labels) const;

  bool operator==(const ReRepresentation&) const = default;

 private:
  std::vector<ColumnGMM> gmms_;
  std::vector<int> discrete_sizes_;
  std::vector<int> sensitive_sizes_;
  std::vector<Slice> slices_;
  int width_ = 0;
  int sensitive_offset_ = 0;
};

bool operator==(const Slice& a, const Slice& b);

}  // namespace antidote

#endif  // ANTIDOTE_GMM_HPP_
