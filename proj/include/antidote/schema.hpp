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

#ifndef ANTIDOTE_SCHEMA_HPP_
#define ANTIDOTE_SCHEMA_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "antidote/keyvalue.hpp"

namespace antidote {

struct CategoricalFeature {
  std::string name;
  std::vector<std::string> values;  // ordered; one-hot position = index

  // -1 when the value is not part of the declared set.
  int code_of(std::string_view value) const;
};

struct ContinuousFeature {
  std::string name;
  // Declared raw bounds. When absent the train split's min/max are used.
  std::optional<double> raw_min;
  std::optional<double> raw_max;
};

struct LabelSpec {
  std::string name;
  std::vector<std::string> positive_values;
};

// Declares which file columns form the sensitive, discrete and continuous
// blocks. The three name sets are disjoint.
struct FeatureSchema {
  std::vector<CategoricalFeature> sensitive;
  std::vector<CategoricalFeature> discrete;
  std::vector<ContinuousFeature> continuous;
  LabelSpec label;

  // File layout. An empty `file_columns` means the first line is a header.
  std::vector<std::string> file_columns;
  char delimiter = ',';
  std::string missing_token = "?";

  int num_sensitive() const { return static_cast<int>(sensitive.size()); }
  int num_discrete() const { return static_cast<int>(discrete.size()); }
  int num_continuous() const { return static_cast<int>(continuous.size()); }
  int sensitive_width() const;
  int discrete_width() const;
  std::vector<int> sensitive_sizes() const;
  std::vector<int> discrete_sizes() const;
  // Number of distinct sensitive value combinations.
  long long sensitive_combinations() const;

  void validate() const;  // throws ConfigError

  static FeatureSchema from_keyvalue(const KeyValueFile& kv);
  static FeatureSchema read(const std::filesystem::path& path);
  // Canonical text form; parses back to an equal schema.
  std::string to_text() const;

  bool operator==(const FeatureSchema&) const = default;
};

bool operator==(const CategoricalFeature& a, const CategoricalFeature& b);
bool operator==(const ContinuousFeature& a, const ContinuousFeature& b);
bool operator==(const LabelSpec& a, const LabelSpec& b);

}  // namespace antidote

#endif  // ANTIDOTE_SCHEMA_HPP_
