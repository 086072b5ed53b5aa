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

#include "antidote/comparability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace antidote {

void ComparabilityConfig::validate(int num_discrete) const {
  if (max_discrete_diff < 0) throw ConfigError("T_d must be non-negative");
  if (max_discrete_diff > num_discrete) {
    throw ConfigError("T_d = " + std::to_string(max_discrete_diff) + " exceeds the " +
                      std::to_string(num_discrete) + " discrete features");
  }
  if (!(max_continuous_gap >= 0.0 && max_continuous_gap <= 1.0)) {
    throw ConfigError("T_c must lie in [0, 1]");
  }
}

const char* relation_name(SensitiveRelation r) {
  switch (r) {
    case SensitiveRelation::kAllDiffer:
      return "all-differ";
    case SensitiveRelation::kSomeDiffer:
      return "some-differ";
    case SensitiveRelation::kNoneDiffer:
      return "none-differ";
  }
  return "?";
}

SensitiveRelation parse_relation(std::string_view name) {
  if (name == "all-differ") return SensitiveRelation::kAllDiffer;
  if (name == "some-differ") return SensitiveRelation::kSomeDiffer;
  if (name == "none-differ") return SensitiveRelation::kNoneDiffer;
  throw std::invalid_argument("unknown sensitive relation '" + std::string(name) + "'");
}

EncodedRow row_of(const EncodedDataset& data, std::size_t row) {
  EncodedRow r;
  r.continuous.assign(data.continuous.cols(), 0.0);
  for (Eigen::Index c = 0; c < data.continuous.cols(); ++c) r.continuous[c] = data.continuous(row, c);
  r.discrete = data.discrete_codes(row);
  r.sensitive = data.sensitive_codes(row);
  r.label = data.labels[row];
  return r;
}

namespace {

template <typename D, typename C>
bool comparable_raw(const D* da, const D* db, int nd, const C* ca, const C* cb, int nc, int la,
                    int lb, const ComparabilityConfig& cfg) {
  if (la != lb) return false;
  for (int c = 0; c < nc; ++c) {
    if (!(std::abs(ca[c] - cb[c]) <= cfg.max_continuous_gap)) return false;
  }
  int diff = 0;
  for (int d = 0; d < nd; ++d) {
    if (da[d] != db[d] && ++diff > cfg.max_discrete_diff) return false;
  }
  return true;
}

SensitiveRelation relation_raw(const int* a, const int* b, int ns) {
  int differ = 0;
  for (int s = 0; s < ns; ++s) differ += a[s] != b[s];
  if (differ == 0) return SensitiveRelation::kNoneDiffer;
  if (differ == ns) return SensitiveRelation::kAllDiffer;
  return SensitiveRelation::kSomeDiffer;
}

}  // namespace

bool is_comparable(const EncodedRow& a, const EncodedRow& b, const ComparabilityConfig& cfg) {
  if (a.discrete.size() != b.discrete.size() || a.continuous.size() != b.continuous.size()) {
    throw ContractViolation("is_comparable: rows do not share a schema");
  }
  return comparable_raw(a.discrete.data(), b.discrete.data(), static_cast<int>(a.discrete.size()),
                        a.continuous.data(), b.continuous.data(),
                        static_cast<int>(a.continuous.size()), a.label, b.label, cfg);
}

SensitiveRelation classify_relation(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ContractViolation("classify_relation: schema mismatch");
  return relation_raw(a.data(), b.data(), static_cast<int>(a.size()));
}

SensitiveRelation classify_relation(const EncodedRow& a, const EncodedRow& b) {
  return classify_relation(a.sensitive, b.sensitive);
}

CodedTable::CodedTable(const EncodedDataset& data)
    : nc_(data.num_continuous()), nd_(data.num_discrete()), ns_(data.num_sensitive()) {
  const std::size_t n = data.rows();
  cont_.resize(n * nc_);
  disc_.resize(n * nd_);
  sens_.resize(n * ns_);
  labels_ = data.labels;
  for (std::size_t r = 0; r < n; ++r) {
    for (int c = 0; c < nc_; ++c) cont_[r * nc_ + c] = data.continuous(r, c);
    const auto d = data.discrete_codes(r);
    std::copy(d.begin(), d.end(), disc_.begin() + r * nd_);
    const auto s = data.sensitive_codes(r);
    std::copy(s.begin(), s.end(), sens_.begin() + r * ns_);
  }
}

bool is_comparable(const CodedTable& a, std::size_t ia, const CodedTable& b, std::size_t ib,
                   const ComparabilityConfig& cfg) {
  return comparable_raw(a.discrete(ia), b.discrete(ib), a.num_discrete(), a.continuous(ia),
                        b.continuous(ib), a.num_continuous(), a.label(ia), b.label(ib), cfg);
}

SensitiveRelation classify_relation(const CodedTable& a, std::size_t ia, const CodedTable& b,
                                    std::size_t ib) {
  return relation_raw(a.sensitive(ia), b.sensitive(ib), a.num_sensitive());
}

namespace {

// Sweeps `block` in order of the first continuous feature and reports every
// comparable pair to `emit`.
template <typename Emit>
void sweep_block(const CodedTable& t, std::vector<std::size_t>& block,
                 const ComparabilityConfig& cfg, Emit&& emit) {
  if (block.size() < 2) return;
  if (t.num_continuous() == 0) {
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = a + 1; b < block.size(); ++b)
        if (is_comparable(t, block[a], t, block[b], cfg)) emit(block[a], block[b]);
    return;
  }
  std::sort(block.begin(), block.end(), [&](std::size_t x, std::size_t y) {
    const double cx = t.continuous(x)[0], cy = t.continuous(y)[0];
    return cx < cy || (cx == cy && x < y);
  });
  for (std::size_t a = 0; a < block.size(); ++a) {
    const double base = t.continuous(block[a])[0];
    for (std::size_t b = a + 1; b < block.size(); ++b) {
      if (t.continuous(block[b])[0] - base > cfg.max_continuous_gap) break;
      if (is_comparable(t, block[a], t, block[b], cfg)) emit(block[a], block[b]);
    }
  }
}

// Groups rows with equal codes on every discrete feature except `skip`
// (skip = -1 keeps all features).
std::vector<std::vector<std::size_t>> group_by_codes(const CodedTable& t,
                                                     std::vector<std::size_t> rows, int skip) {
  const int nd = t.num_discrete();
  auto less = [&](std::size_t x, std::size_t y) {
    const int* a = t.discrete(x);
    const int* b = t.discrete(y);
    for (int d = 0; d < nd; ++d) {
      if (d == skip || a[d] == b[d]) continue;
      return a[d] < b[d];
    }
    return x < y;
  };
  auto same = [&](std::size_t x, std::size_t y) {
    const int* a = t.discrete(x);
    const int* b = t.discrete(y);
    for (int d = 0; d < nd; ++d)
      if (d != skip && a[d] != b[d]) return false;
    return true;
  };
  std::sort(rows.begin(), rows.end(), less);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < rows.size();) {
    std::size_t e = k + 1;
    while (e < rows.size() && same(rows[k], rows[e])) ++e;
    if (e - k >= 2) groups.emplace_back(rows.begin() + k, rows.begin() + e);
    k = e;
  }
  return groups;
}

}  // namespace

std::vector<ComparablePair> mine_pairs(const EncodedDataset& data, const ComparabilityConfig& cfg) {
  cfg.validate(data.num_discrete());
  const CodedTable t(data);
  const int nd = t.num_discrete();
  std::vector<ComparablePair> out;
  auto emit = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    out.push_back({a, b, t.label(a), classify_relation(t, a, t, b)});
  };

  for (int label : {0, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < t.rows(); ++r)
      if (t.label(r) == label) rows.push_back(r);
    if (rows.size() < 2) continue;

    if (cfg.max_discrete_diff >= nd || cfg.max_discrete_diff >= 2) {
      // No useful discrete blocking; the sweep checks the full predicate.
      sweep_block(t, rows, cfg, emit);
    } else if (cfg.max_discrete_diff == 0) {
      for (auto& g : group_by_codes(t, rows, -1)) sweep_block(t, g, cfg, emit);
    } else {
      // Hamming <= 1: a pair shares all codes but at most feature f. Emit it
      // only from the block of its first differing feature (f = 0 when equal).
      for (int f = 0; f < nd; ++f) {
        for (auto& g : group_by_codes(t, rows, f)) {
          sweep_block(t, g, cfg, [&](std::size_t a, std::size_t b) {
            const int* da = t.discrete(a);
            const int* db = t.discrete(b);
            int first = 0;
            while (first < nd && da[first] == db[first]) ++first;
            if ((first == nd ? 0 : first) == f) emit(a, b);
          });
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ComparablePair& x, const ComparablePair& y) {
    return x.i < y.i || (x.i == y.i && x.j < y.j);
  });
  return out;
}

std::pair<std::vector<ComparablePair>, std::vector<ComparablePair>> split_pairs(
    const std::vector<ComparablePair>& pairs) {
  std::pair<std::vector<ComparablePair>, std::vector<ComparablePair>> out;
  for (const auto& p : pairs) (p.label == 1 ? out.first : out.second).push_back(p);
  return out;
}

std::vector<ComparablePair> sensitive_differing(const std::vector<ComparablePair>& pairs) {
  std::vector<ComparablePair> out;
  for (const auto& p : pairs)
    if (p.relation != SensitiveRelation::kNoneDiffer) out.push_back(p);
  return out;
}

PairCounts count_pairs(const std::vector<ComparablePair>& pairs) {
  PairCounts c;
  for (const auto& p : pairs) {
    const bool differ = p.relation != SensitiveRelation::kNoneDiffer;
    if (p.label == 1) {
      ++c.positive;
      c.positive_differing += differ;
    } else {
      ++c.negative;
      c.negative_differing += differ;
    }
  }
  return c;
}

std::string pairs_to_csv(const std::vector<ComparablePair>& pairs) {
  std::ostringstream out;
  out << "i,j,label,relation\n";
  for (const auto& p : pairs) {
    out << p.i << ',' << p.j << ',' << p.label << ',' << relation_name(p.relation) << '\n';
  }
  return out.str();
}

}  // namespace antidote
