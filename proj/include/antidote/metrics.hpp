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

#ifndef ANTIDOTE_METRICS_HPP_
#define ANTIDOTE_METRICS_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "antidote/comparability.hpp"

namespace antidote {

// Probability that a random positive outranks a random negative, ties
// counted one half. Throws UndefinedMetric unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// sum_k (R_k - R_{k-1}) P_k over descending distinct score thresholds.
// Throws UndefinedMetric without positives.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// Quantile with linear interpolation between closest ranks; q in [0, 1].
double quantile_linear(std::vector<double> values, double q);

struct GapStats {
  std::size_t count = 0;
  double mean = 0.0;  // x100 scale
  double q3 = 0.0;    // x100 scale

  bool operator==(const GapStats&) const = default;
};

// Positive- and negative-label gap statistics; absent when the class has no
// pairs.
struct GapPair {
  std::optional<GapStats> positive;
  std::optional<GapStats> negative;

  bool operator==(const GapPair&) const = default;
};

struct CompGapReport {
  GapPair headline;                   // pairs whose sensitive attributes differ
  std::array<GapPair, 3> by_relation;  // indexed by SensitiveRelation

  bool operator==(const CompGapReport&) const = default;
};

std::optional<GapStats> gap_stats(std::vector<double> gaps);

// |f(x_i) - f(x_j)| x 100 over the pairs, split by shared label. The headline
// uses pairs with at least one differing sensitive attribute; the breakdown
// covers every relation present in `pairs`.
CompGapReport comp_gap_stats(std::span<const double> scores, const std::vector<ComparablePair>& pairs);

struct ClassificationStats {
  double accuracy = 0.0;           // x100
  double balanced_accuracy = 0.0;  // x100
  double f1 = 0.0;                 // x100
};

ClassificationStats classification_stats(std::span<const double> scores, std::span<const int> labels,
                                         double threshold = 0.5);

struct FairnessReport {
  std::string regime;
  std::string classifier;
  int seeds = 1;
  double antidote_percentage = 0.0;
  double roc = 0.0;  // x100
  double ap = 0.0;   // x100
  ClassificationStats classification;
  CompGapReport comp;
};

FairnessReport evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                               const std::vector<ComparablePair>& test_pairs);

// Arithmetic mean of every metric; a gap statistic is absent when it is
// absent in any input.
FairnessReport average_reports(const std::vector<FairnessReport>& reports);

std::string report_to_json(const FairnessReport& report);
std::string reports_to_json(const std::vector<FairnessReport>& reports);
std::string report_csv_header();
std::string report_csv_row(const FairnessReport& report);

}  // namespace antidote

#endif  // ANTIDOTE_METRICS_HPP_
