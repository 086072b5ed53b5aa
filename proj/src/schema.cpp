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

#include "antidote/schema.hpp"

#include <set>
#include <sstream>

#include "antidote/common.hpp"

namespace antidote {

namespace {
constexpr int kSchemaVersion = 1;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}
}  // namespace

bool operator==(const CategoricalFeature& a, const CategoricalFeature& b) {
  return a.name == b.name && a.values == b.values;
}
bool operator==(const ContinuousFeature& a, const ContinuousFeature& b) {
  return a.name == b.name && a.raw_min == b.raw_min && a.raw_max == b.raw_max;
}
bool operator==(const LabelSpec& a, const LabelSpec& b) {
  return a.name == b.name && a.positive_values == b.positive_values;
}

int CategoricalFeature::code_of(std::string_view value) const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == value) return static_cast<int>(i);
  }
  return -1;
}

int FeatureSchema::sensitive_width() const {
  int w = 0;
  for (const auto& f : sensitive) w += static_cast<int>(f.values.size());
  return w;
}

int FeatureSchema::discrete_width() const {
  int w = 0;
  for (const auto& f : discrete) w += static_cast<int>(f.values.size());
  return w;
}

std::vector<int> FeatureSchema::sensitive_sizes() const {
  std::vector<int> s;
  for (const auto& f : sensitive) s.push_back(static_cast<int>(f.values.size()));
  return s;
}

std::vector<int> FeatureSchema::discrete_sizes() const {
  std::vector<int> s;
  for (const auto& f : discrete) s.push_back(static_cast<int>(f.values.size()));
  return s;
}

long long FeatureSchema::sensitive_combinations() const {
  long long n = 1;
  for (const auto& f : sensitive) n *= static_cast<long long>(f.values.size());
  return n;
}

void FeatureSchema::validate() const {
  if (sensitive.empty()) throw ConfigError("schema: at least one sensitive feature is required");
  if (label.name.empty()) throw ConfigError("schema: label column is required");
  if (label.positive_values.empty()) throw ConfigError("schema: label.positive must list a value");
  std::set<std::string> names;
  auto claim = [&](const std::string& n) {
    if (n.empty()) throw ConfigError("schema: empty feature name");
    if (!names.insert(n).second) {
      throw ConfigError("schema: column '" + n + "' declared more than once");
    }
  };
  for (const auto& f : sensitive) {
    claim(f.name);
    if (f.values.empty()) throw ConfigError("schema: empty value set for " + f.name);
  }
  for (const auto& f : discrete) {
    claim(f.name);
    if (f.values.empty()) throw ConfigError("schema: empty value set for " + f.name);
  }
  for (const auto& f : continuous) {
    claim(f.name);
    if (f.raw_min.has_value() != f.raw_max.has_value()) {
      throw ConfigError("schema: range for " + f.name + " needs both bounds");
    }
    if (f.raw_min && !(*f.raw_min < *f.raw_max)) {
      throw ConfigError("schema: raw min must be below raw max for " + f.name);
    }
  }
  claim(label.name);
  for (const auto& f : sensitive) {
    if (std::set<std::string>(f.values.begin(), f.values.end()).size() != f.values.size())
      throw ConfigError("schema: duplicate value in " + f.name);
  }
  for (const auto& f : discrete) {
    if (std::set<std::string>(f.values.begin(), f.values.end()).size() != f.values.size())
      throw ConfigError("schema: duplicate value in " + f.name);
  }
  if (!file_columns.empty()) {
    std::set<std::string> cols(file_columns.begin(), file_columns.end());
    for (const auto& n : names) {
      if (!cols.count(n)) throw ConfigError("schema: column '" + n + "' missing from 'columns'");
    }
  }
}

FeatureSchema FeatureSchema::from_keyvalue(const KeyValueFile& kv) {
  const auto version = kv.get_int("schema_version", -1);
  if (version != kSchemaVersion) {
    throw ConfigError(kv.origin() + ": unsupported schema_version " + std::to_string(version));
  }
  FeatureSchema s;
  const auto delim = kv.get_or("delimiter", ",");
  if (delim == "tab" || delim == "\\t") {
    s.delimiter = '\t';
  } else if (delim.size() == 1) {
    s.delimiter = delim[0];
  } else {
    throw ConfigError(kv.origin() + ": delimiter must be one character or 'tab'");
  }
  s.missing_token = kv.get_or("missing", "?");
  s.file_columns = kv.get_list("columns");
  s.label.name = kv.get("label");
  s.label.positive_values = kv.get_list("label.positive");

  std::set<std::string> continuous_names;
  for (const auto& name : kv.get_list("continuous")) {
    ContinuousFeature f{name, std::nullopt, std::nullopt};
    if (auto range = kv.find("continuous." + name + ".range")) {
      const auto parts = split_list(*range);
      if (parts.size() != 2) throw ConfigError(kv.origin() + ": range needs two numbers");
      f.raw_min = parse_double(parts[0], name);
      f.raw_max = parse_double(parts[1], name);
    }
    s.continuous.push_back(f);
    continuous_names.insert(name);
  }
  for (const auto& e : kv.entries()) {
    auto take = [&](std::string_view prefix, std::vector<CategoricalFeature>& into) {
      if (e.key.rfind(prefix, 0) != 0) return;
      into.push_back({e.key.substr(prefix.size()), split_list(e.value)});
    };
    take("sensitive.", s.sensitive);
    take("discrete.", s.discrete);
    if (e.key.rfind("continuous.", 0) == 0) {
      const auto rest = e.key.substr(11);
      const auto dot = rest.rfind(".range");
      if (dot == std::string::npos || !continuous_names.count(rest.substr(0, dot))) {
        throw ConfigError(kv.origin() + ":" + std::to_string(e.line) + ": unknown key " + e.key);
      }
    }
  }
  s.validate();
  return s;
}

FeatureSchema FeatureSchema::read(const std::filesystem::path& path) {
  return from_keyvalue(KeyValueFile::read(path));
}

std::string FeatureSchema::to_text() const {
  std::ostringstream out;
  out << "schema_version = " << kSchemaVersion << "\n";
  out << "delimiter = " << (delimiter == '\t' ? std::string("tab") : std::string(1, delimiter)) << "\n";
  out << "missing = " << missing_token << "\n";
  if (!file_columns.empty()) out << "columns = " << join(file_columns) << "\n";
  out << "label = " << label.name << "\n";
  out << "label.positive = " << join(label.positive_values) << "\n";
  std::vector<std::string> cont;
  for (const auto& f : continuous) cont.push_back(f.name);
  out << "continuous = " << join(cont) << "\n";
  out.precision(17);
  for (const auto& f : continuous) {
    if (f.raw_min) out << "continuous." << f.name << ".range = " << *f.raw_min << ", " << *f.raw_max << "\n";
  }
  for (const auto& f : discrete) out << "discrete." << f.name << " = " << join(f.values) << "\n";
  for (const auto& f : sensitive) out << "sensitive." << f.name << " = " << join(f.values) << "\n";
  return out.str();
}

}  // namespace antidote
