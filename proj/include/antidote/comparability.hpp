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

#ifndef ANTIDOTE_COMPARABILITY_HPP_
#define ANTIDOTE_COMPARABILITY_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "antidote/dataset.hpp"

namespace antidote {

struct ComparabilityConfig {
  int max_discrete_diff = 1;          // T_d
  double max_continuous_gap = 0.025;  // T_c, on the [0,1] view

  void validate(int num_discrete) const;  // throws ConfigError
};

enum class SensitiveRelation : std::uint8_t { kAllDiffer = 0, kSomeDiffer = 1, kNoneDiffer = 2 };

const char* relation_name(SensitiveRelation r);
SensitiveRelation parse_relation(std::string_view name);

struct ComparablePair {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  int label = 0;
  SensitiveRelation relation = SensitiveRelation::kNoneDiffer;

  bool operator==(const ComparablePair&) const = default;
};

// One row in category-code form.
struct EncodedRow {
  std::vector<double> continuous;
  std::vector<int> discrete;
  std::vector<int> sensitive;
  int label = 0;
};

EncodedRow row_of(const EncodedDataset& data, std::size_t row);

// Discrete mismatches <= T_d, every continuous gap <= T_c, equal labels.
// Sensitive attributes are unconstrained.
bool is_comparable(const EncodedRow& a, const EncodedRow& b, const ComparabilityConfig& cfg);

SensitiveRelation classify_relation(const EncodedRow& a, const EncodedRow& b);
SensitiveRelation classify_relation(const std::vector<int>& a, const std::vector<int>& b);

// Category codes of a dataset laid out for fast repeated comparisons.
class CodedTable {
 public:
  explicit CodedTable(const EncodedDataset& data);

  std::size_t rows() const { return labels_.size(); }
  int num_discrete() const { return nd_; }
  int num_continuous() const { return nc_; }
  int num_sensitive() const { return ns_; }
  const double* continuous(std::size_t r) const { return cont_.data() + r * nc_; }
  const int* discrete(std::size_t r) const { return disc_.data() + r * nd_; }
  const int* sensitive(std::size_t r) const { return sens_.data() + r * ns_; }
  int label(std::size_t r) const { return labels_[r]; }

 private:
  int nc_, nd_, ns_;
  std::vector<double> cont_;
  std::vector<int> disc_;
  std::vector<int> sens_;
  std::vector<int> labels_;
};

bool is_comparable(const CodedTable& a, std::size_t ia, const CodedTable& b, std::size_t ib,
                   const ComparabilityConfig& cfg);
SensitiveRelation classify_relation(const CodedTable& a, std::size_t ia, const CodedTable& b,
                                    std::size_t ib);

// All comparable (i, j), i < j, sorted by (i, j). Rows are blocked by label,
// then by all-but-one discrete feature when T_d = 1 (or all of them when
// T_d = 0), and swept in order of the first continuous feature.
std::vector<ComparablePair> mine_pairs(const EncodedDataset& data, const ComparabilityConfig& cfg);

// (positive-label pairs, negative-label pairs).
std::pair<std::vector<ComparablePair>, std::vector<ComparablePair>> split_pairs(
    const std::vector<ComparablePair>& pairs);

// Pairs whose sensitive attributes are not all equal.
std::vector<ComparablePair> sensitive_differing(const std::vector<ComparablePair>& pairs);

struct PairCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t positive_differing = 0;  // relation != none-differ
  std::size_t negative_differing = 0;
};

PairCounts count_pairs(const std::vector<ComparablePair>& pairs);

// CSV with header `i,j,label,relation`.
std::string pairs_to_csv(const std::vector<ComparablePair>& pairs);

}  // namespace antidote

#endif  // ANTIDOTE_COMPARABILITY_HPP_
