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

#ifndef ANTIDOTE_DATASET_HPP_
#define ANTIDOTE_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "antidote/common.hpp"
#include "antidote/schema.hpp"

namespace antidote {

// Schema-typed cells after ingestion. Categorical cells are stored as codes
// into the schema's value sets; every row is complete.
struct RawTable {
  std::size_t rows = 0;
  std::vector<std::vector<double>> continuous;  // [feature][row]
  std::vector<std::vector<int>> discrete;       // [feature][row]
  std::vector<std::vector<int>> sensitive;      // [feature][row]
  std::vector<int> labels;
  std::size_t dropped_rows = 0;
};

// Reads a delimiter-separated file. Rows with missing cells, unparseable
// numbers, unknown categories or a wrong cell count are dropped and counted.
// Throws SchemaMismatch when a schema column is absent from the header.
RawTable load_dataset(const std::filesystem::path& path, const FeatureSchema& schema);
RawTable parse_dataset(std::string_view text, const FeatureSchema& schema,
                       std::string_view origin = "<text>");

enum class Split : std::uint8_t { kTrain = 0, kTest = 1, kSynthetic = 2 };

// Comparability / generation view: continuous block in [0,1], raw one-hot
// discrete and sensitive blocks.
struct EncodedDataset {
  Matrix continuous;  // rows x N_c
  Matrix discrete;    // rows x sum |d_i|
  Matrix sensitive;   // rows x sum |s_i|
  std::vector<int> discrete_sizes;
  std::vector<int> sensitive_sizes;
  std::vector<int> labels;
  Split split = Split::kTrain;

  std::size_t rows() const { return labels.size(); }
  int num_continuous() const { return static_cast<int>(continuous.cols()); }
  int num_discrete() const { return static_cast<int>(discrete_sizes.size()); }
  int num_sensitive() const { return static_cast<int>(sensitive_sizes.size()); }
  int width() const {
    return static_cast<int>(continuous.cols() + discrete.cols() + sensitive.cols());
  }

  // Row-wise concatenation C | D | S.
  Matrix joined() const;
  // Category codes recovered from the one-hot blocks (argmax per slice).
  std::vector<int> discrete_codes(std::size_t row) const;
  std::vector<int> sensitive_codes(std::size_t row) const;

  // Throws ContractViolation when a block breaks its invariant.
  void check_invariants() const;

  bool operator==(const EncodedDataset&) const = default;
};

// Train-split scaling statistics for the continuous block.
struct ScalingStats {
  std::vector<double> min;
  std::vector<double> max;
};

ScalingStats fit_scaling(const RawTable& train, const FeatureSchema& schema);

EncodedDataset encode(const RawTable& raw, const FeatureSchema& schema,
                      const ScalingStats& stats, Split split);

// Row subset, preserving order.
EncodedDataset select_rows(const EncodedDataset& data, const std::vector<std::size_t>& rows);
// Stacks b under a; block layouts must match.
EncodedDataset concat_rows(const EncodedDataset& a, const EncodedDataset& b);

EncodedDataset drop_sensitive(const EncodedDataset& data);

// Classifier view: every column of C | D | S standardized with train-split
// mean and standard deviation (unit scale for constant columns).
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(Eigen::RowVectorXd mean, Eigen::RowVectorXd scale)
      : mean_(std::move(mean)), scale_(std::move(scale)) {}

  static Standardizer fit(const Matrix& train);
  Matrix transform(const Matrix& x) const;
  const Eigen::RowVectorXd& mean() const { return mean_; }
  const Eigen::RowVectorXd& scale() const { return scale_; }

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

// Columnar binary file: "ANTD" magic, u32 version, split tag, dimensions,
// then C, D, S as row-major f64 and labels as u8.
std::string serialize_dataset(const EncodedDataset& data);
EncodedDataset deserialize_dataset(std::string_view bytes);
void write_dataset(const std::filesystem::path& path, const EncodedDataset& data);
EncodedDataset read_dataset(const std::filesystem::path& path);

}  // namespace antidote

#endif  // ANTIDOTE_DATASET_HPP_
