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

#ifndef ANTIDOTE_KEYVALUE_HPP_
#define ANTIDOTE_KEYVALUE_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace antidote {

// Plain-text `key = value` file. `#` starts a comment, blank lines are
// ignored, and entries keep their file order. List values are comma separated.
class KeyValueFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };

  static KeyValueFile parse(std::string_view text, std::string origin = "<text>");
  static KeyValueFile read(const std::filesystem::path& path);

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

  bool has(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;
  std::string get(std::string_view key) const;  // throws ConfigError if absent
  std::string get_or(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<std::string> get_list(std::string_view key) const;

 private:
  std::string origin_;
  std::vector<Entry> entries_;
};

std::string trim(std::string_view s);
std::vector<std::string> split_list(std::string_view s, char sep = ',');
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace antidote

#endif  // ANTIDOTE_KEYVALUE_HPP_
