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

#include <random>

#include "antidote/comparability.hpp"
#include "test_util.hpp"

namespace antidote {
namespace {

EncodedRow row(std::vector<double> c, std::vector<int> d, std::vector<int> s, int y) {
  return EncodedRow{std::move(c), std::move(d), std::move(s), y};
}

const ComparabilityConfig kDefaultThresholds{1, 0.025};

TEST(IsComparable, IdenticalRowsAreComparable) {
  const auto a = row({0.1, 0.2}, {1, 2, 0}, {1}, 1);
  EXPECT_TRUE(is_comparable(a, a, kDefaultThresholds));
  EXPECT_TRUE(is_comparable(a, a, ComparabilityConfig{0, 0.0}));
}

TEST(IsComparable, TwoDiscreteDifferencesBreakIt) {
  const auto a = row({0.1}, {1, 2, 0}, {1}, 0);
  EXPECT_TRUE(is_comparable(a, row({0.1}, {0, 2, 0}, {1}, 0), kDefaultThresholds));
  EXPECT_FALSE(is_comparable(a, row({0.1}, {0, 1, 0}, {1}, 0), kDefaultThresholds));
}

TEST(IsComparable, LabelsMustMatch) {
  EXPECT_FALSE(is_comparable(row({0.1}, {1}, {1}, 0), row({0.1}, {1}, {1}, 1), kDefaultThresholds));
}

TEST(IsComparable, ContinuousGapBoundaryIsInclusive) {
  const auto a = row({0.5}, {0}, {0}, 1);
  EXPECT_TRUE(is_comparable(a, row({0.52}, {0}, {0}, 1), kDefaultThresholds));
  EXPECT_FALSE(is_comparable(a, row({0.53}, {0}, {0}, 1), kDefaultThresholds));
}

TEST(IsComparable, SensitiveAttributesAreUnconstrained) {
  EXPECT_TRUE(is_comparable(row({0.1}, {1}, {0, 0}, 1), row({0.1}, {1}, {3, 2}, 1), kDefaultThresholds));
}

TEST(ClassifyRelation, AllSomeNone) {
  EXPECT_EQ(classify_relation(std::vector<int>{0, 1}, std::vector<int>{1, 0}), SensitiveRelation::kAllDiffer);
  EXPECT_EQ(classify_relation(std::vector<int>{0, 1}, std::vector<int>{1, 1}), SensitiveRelation::kSomeDiffer);
  EXPECT_EQ(classify_relation(std::vector<int>{0, 1}, std::vector<int>{0, 1}), SensitiveRelation::kNoneDiffer);
  EXPECT_EQ(classify_relation(std::vector<int>{2}, std::vector<int>{0}), SensitiveRelation::kAllDiffer);
  EXPECT_EQ(parse_relation(relation_name(SensitiveRelation::kSomeDiffer)), SensitiveRelation::kSomeDiffer);
}

TEST(ComparabilityConfig, RejectsOutOfRange) {
  EXPECT_THROW((ComparabilityConfig{-1, 0.1}.validate(3)), ConfigError);
  EXPECT_THROW((ComparabilityConfig{4, 0.1}.validate(3)), ConfigError);
  EXPECT_THROW((ComparabilityConfig{1, 1.5}.validate(3)), ConfigError);
  EXPECT_THROW((ComparabilityConfig{1, -0.1}.validate(3)), ConfigError);
  EXPECT_NO_THROW((ComparabilityConfig{3, 1.0}.validate(3)));
}

TEST(MinePairs, TwoIdenticalRowsGiveOnePair) {
  Rng rng(1);
  auto d = testing::random_dataset(rng, 1, 2, {3}, {2});
  d = concat_rows(d, d);
  const auto p = mine_pairs(d, kDefaultThresholds);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], (ComparablePair{0, 1, d.labels[0], SensitiveRelation::kNoneDiffer}));
}

TEST(MinePairs, EmptyAndSingletonDatasets) {
  Rng rng(2);
  const auto d = testing::random_dataset(rng, 1, 2, {3}, {2});
  EXPECT_TRUE(mine_pairs(d, kDefaultThresholds).empty());
  EXPECT_TRUE(mine_pairs(select_rows(d, {}), kDefaultThresholds).empty());
}

TEST(MinePairs, MatchesBruteForceOn200Rows) {
  Rng rng(3);
  const auto d = testing::random_dataset(rng, 200, 3, {3, 2, 4}, {2, 2}, 20);
  const auto expected = testing::brute_force_pairs(d, ComparabilityConfig{1, 0.1});
  EXPECT_FALSE(expected.empty());
  EXPECT_EQ(mine_pairs(d, ComparabilityConfig{1, 0.1}), expected);
}

// Sweeps the thresholds the blocked miner specialises on.
class MinePairsThresholds : public ::testing::TestWithParam<std::pair<int, double>> {};

TEST_P(MinePairsThresholds, MatchesBruteForce) {
  const auto [td, tc] = GetParam();
  const ComparabilityConfig cfg{td, tc};
  Rng rng(static_cast<std::uint64_t>(td * 1000 + tc * 100));
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = testing::random_dataset(rng, 150, 2, {2, 3, 2}, {3}, 10);
    EXPECT_EQ(mine_pairs(d, cfg), testing::brute_force_pairs(d, cfg)) << "trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(Grid, MinePairsThresholds,
                         ::testing::Values(std::make_pair(0, 0.0), std::make_pair(0, 0.1), std::make_pair(1, 0.0),
                                           std::make_pair(1, 0.2), std::make_pair(2, 0.1), std::make_pair(3, 1.0)));

TEST(MinePairs, OutputSortedAndSatisfiesPredicate) {
  Rng rng(4);
  const auto d = testing::random_dataset(rng, 300, 2, {2, 2}, {2}, 15);
  const auto p = mine_pairs(d, kDefaultThresholds);
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_LT(p[k].i, p[k].j);
    if (k) {
      EXPECT_TRUE(std::tie(p[k - 1].i, p[k - 1].j) < std::tie(p[k].i, p[k].j));
    }
    EXPECT_TRUE(is_comparable(row_of(d, p[k].i), row_of(d, p[k].j), kDefaultThresholds));
  }
}

TEST(PairCounts, SplitsByLabelAndRelation) {
  const std::vector<ComparablePair> p{{0, 1, 1, SensitiveRelation::kAllDiffer},
                                      {0, 2, 1, SensitiveRelation::kNoneDiffer},
                                      {3, 4, 0, SensitiveRelation::kSomeDiffer},
                                      {3, 5, 0, SensitiveRelation::kNoneDiffer},
                                      {4, 5, 0, SensitiveRelation::kNoneDiffer}};
  const auto c = count_pairs(p);
  EXPECT_EQ(c.positive, 2u);
  EXPECT_EQ(c.negative, 3u);
  EXPECT_EQ(c.positive_differing, 1u);
  EXPECT_EQ(c.negative_differing, 1u);
  EXPECT_EQ(sensitive_differing(p).size(), 2u);
  const auto [pos, neg] = split_pairs(p);
  EXPECT_EQ(pos.size(), 2u);
  EXPECT_EQ(neg.size(), 3u);
  EXPECT_EQ(pairs_to_csv({p[0]}), "i,j,label,relation\n0,1,1,all-differ\n");
}

}  // namespace
}  // namespace antidote
