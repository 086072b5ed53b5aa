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

#include "antidote/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "antidote/common.hpp"

namespace antidote {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("expected a number for " + std::string(what) + ", got '" + t + "'");
  }
  return v;
}

long long parse_int(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("expected an integer for " + std::string(what) + ", got '" + t + "'");
  }
  return v;
}

KeyValueFile KeyValueFile::parse(std::string_view text, std::string origin) {
  KeyValueFile kv;
  kv.origin_ = std::move(origin);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(kv.origin_ + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    Entry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
            lineno};
    if (e.key.empty()) {
      throw ConfigError(kv.origin_ + ":" + std::to_string(lineno) + ": empty key");
    }
    if (kv.has(e.key)) {
      throw ConfigError(kv.origin_ + ":" + std::to_string(lineno) + ": duplicate key '" + e.key + "'");
    }
    kv.entries_.push_back(std::move(e));
  }
  return kv;
}

KeyValueFile KeyValueFile::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool KeyValueFile::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueFile::find(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return e.value;
  }
  return std::nullopt;
}

std::string KeyValueFile::get(std::string_view key) const {
  auto v = find(key);
  if (!v) throw ConfigError(origin_ + ": missing key '" + std::string(key) + "'");
  return *v;
}

std::string KeyValueFile::get_or(std::string_view key, std::string fallback) const {
  auto v = find(key);
  return v ? *v : std::move(fallback);
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
  auto v = find(key);
  return v ? parse_double(*v, key) : fallback;
}

long long KeyValueFile::get_int(std::string_view key, long long fallback) const {
  auto v = find(key);
  return v ? parse_int(*v, key) : fallback;
}

bool KeyValueFile::get_bool(std::string_view key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(origin_ + ": expected boolean for '" + std::string(key) + "'");
}

std::vector<std::string> KeyValueFile::get_list(std::string_view key) const {
  auto v = find(key);
  return v ? split_list(*v) : std::vector<std::string>{};
}

}  // namespace antidote
