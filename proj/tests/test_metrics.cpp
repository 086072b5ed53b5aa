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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "antidote/metrics.hpp"

namespace antidote {
namespace {

double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      den += 1;
      num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return num / den;
}

// Step-wise precision/recall sweep over distinct thresholds.
double sweep_ap(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  const double positives = std::count(y.begin(), y.end(), 1);
  double ap = 0, prev_recall = 0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp) += 1;
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * tp / (tp + fp);
    prev_recall = recall;
  }
  return ap;
}

double reference_percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

TEST(RocAuc, HandExamples) {
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.9, 0.8, 0.3}, std::vector<int>{1, 0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>(6, 0.4), std::vector<int>{0, 1, 0, 1, 1, 0}), 0.5);
}

TEST(RocAuc, SingleClassIsUndefined) {
  EXPECT_THROW(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetric);
  EXPECT_THROW(average_precision(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), UndefinedMetric);
}

TEST(RocAuc, EqualsBruteForcePairCountOnRandomInputs) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 1000)(rng);
    const int levels = std::uniform_int_distribution<int>(2, 50)(rng);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = std::uniform_int_distribution<int>(0, levels)(rng) / static_cast<double>(levels);
      y[i] = std::bernoulli_distribution(0.3)(rng);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(roc_auc(s, y), brute_auc(s, y), 1e-12);
  }
}

TEST(AveragePrecision, HandExamples) {
  EXPECT_DOUBLE_EQ(average_precision(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{1, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(std::vector<double>{0.2, 0.9}, std::vector<int>{1, 0}), 0.5);
}

TEST(AveragePrecision, MatchesThresholdSweepAndIsRankInvariant) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 300)(rng);
    std::vector<double> s(n), t(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = std::uniform_int_distribution<int>(0, 30)(rng) / 30.0;
      t[i] = std::exp(3.0 * s[i]) - 7.0;
      y[i] = std::bernoulli_distribution(0.4)(rng);
    }
    y[0] = 1;
    EXPECT_NEAR(average_precision(s, y), sweep_ap(s, y), 1e-12);
    EXPECT_NEAR(average_precision(t, y), average_precision(s, y), 1e-12);
  }
}

TEST(Quantile, HandExampleAndReferenceOracle) {
  EXPECT_DOUBLE_EQ(quantile_linear({0, 10, 20, 30}, 0.75), 22.5);
  EXPECT_DOUBLE_EQ(quantile_linear({7}, 0.75), 7.0);
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 200)(rng);
    std::vector<double> v(n);
    for (auto& x : v) x = std::uniform_real_distribution<double>(0, 100)(rng);
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) EXPECT_NEAR(quantile_linear(v, q), reference_percentile(v, q), 1e-9);
  }
}

TEST(GapStats, MeanAndUpperQuartile) {
  const auto g = gap_stats({0.0, 10.0, 20.0, 30.0});
  ASSERT_TRUE(g);
  EXPECT_EQ(g->count, 4u);
  EXPECT_NEAR(g->mean, 15.0, 1e-12);
  EXPECT_NEAR(g->q3, 22.5, 1e-12);
  EXPECT_FALSE(gap_stats({}));
}

TEST(CompGap, ConstantModelHasZeroGaps) {
  const std::vector<double> scores(6, 0.42);
  const std::vector<ComparablePair> pairs{{0, 1, 1, SensitiveRelation::kAllDiffer},
                                          {2, 3, 0, SensitiveRelation::kSomeDiffer},
                                          {4, 5, 0, SensitiveRelation::kNoneDiffer}};
  const auto r = comp_gap_stats(scores, pairs);
  EXPECT_EQ(r.headline.positive->mean, 0.0);
  EXPECT_EQ(r.headline.negative->q3, 0.0);
  EXPECT_EQ(r.headline.negative->count, 1u);
}

TEST(CompGap, HeadlineExcludesNoneDifferAndIsOrderInvariant) {
  Rng rng(4);
  std::vector<double> scores(40);
  for (auto& s : scores) s = std::uniform_real_distribution<double>(0, 1)(rng);
  std::vector<ComparablePair> pairs;
  for (std::size_t k = 0; k + 1 < 40; k += 2) {
    pairs.push_back({k, k + 1, static_cast<int>(k % 4 == 0), static_cast<SensitiveRelation>(k % 3)});
  }
  const auto a = comp_gap_stats(scores, pairs);
  auto shuffled = pairs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (auto& p : shuffled)
    if (std::bernoulli_distribution(0.5)(rng)) std::swap(p.i, p.j);
  EXPECT_EQ(comp_gap_stats(scores, shuffled), a);

  std::vector<double> pos;
  for (const auto& p : pairs)
    if (p.label == 1 && p.relation != SensitiveRelation::kNoneDiffer) pos.push_back(std::abs(scores[p.i] - scores[p.j]));
  double mean = 0;
  for (double g : pos) mean += g;
  mean = 100.0 * mean / pos.size();
  EXPECT_NEAR(a.headline.positive->mean, mean, 1e-9);
}

TEST(Classification, PerfectAndAllPositive) {
  const std::vector<int> y{0, 1, 0, 1};
  const auto perfect = classification_stats(std::vector<double>{0.1, 0.9, 0.2, 0.8}, y);
  EXPECT_DOUBLE_EQ(perfect.accuracy, 100.0);
  EXPECT_DOUBLE_EQ(perfect.balanced_accuracy, 100.0);
  EXPECT_DOUBLE_EQ(perfect.f1, 100.0);
  const auto all_pos = classification_stats(std::vector<double>(4, 0.9), y);
  EXPECT_DOUBLE_EQ(all_pos.balanced_accuracy, 50.0);
  EXPECT_DOUBLE_EQ(all_pos.accuracy, 50.0);
  EXPECT_NEAR(all_pos.f1, 100.0 * 2.0 / 3.0, 1e-12);
}

TEST(Reports, AveragingAndSerialisation) {
  FairnessReport a, b;
  a.regime = b.regime = "anti";
  a.classifier = b.classifier = "nn";
  a.roc = 80;
  b.roc = 90;
  a.comp.headline.positive = GapStats{10, 20.0, 30.0};
  b.comp.headline.positive = GapStats{10, 30.0, 40.0};
  const auto avg = average_reports({a, b});
  EXPECT_DOUBLE_EQ(avg.roc, 85.0);
  EXPECT_EQ(avg.seeds, 2);
  EXPECT_DOUBLE_EQ(avg.comp.headline.positive->mean, 25.0);
  EXPECT_FALSE(avg.comp.headline.negative);

  const auto j = nlohmann::json::parse(reports_to_json({avg}));
  EXPECT_EQ(j["format_version"], 1);
  EXPECT_DOUBLE_EQ(j["reports"][0]["roc"].get<double>(), 85.0);
  const auto header = report_csv_header();
  const auto row = report_csv_row(avg);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}

}  // namespace
}  // namespace antidote
