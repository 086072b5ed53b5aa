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

#include "antidote/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

namespace antidote {

namespace {

void check_sizes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ContractViolation("scores and labels differ in length");
}

std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_sizes(scores, labels);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double pos = 0, neg = 0, wins = 0;
  std::size_t k = 0;
  while (k < idx.size()) {
    std::size_t end = k;
    double p = 0, n = 0;
    while (end < idx.size() && scores[idx[end]] == scores[idx[k]]) {
      (labels[idx[end]] ? p : n) += 1;
      ++end;
    }
    // Positives in this tie group beat every earlier negative and tie with
    // the group's negatives.
    wins += p * neg + 0.5 * p * n;
    pos += p;
    neg += n;
    k = end;
  }
  if (pos == 0 || neg == 0) throw UndefinedMetric("ROC AUC needs both classes");
  return wins / (pos * neg);
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_sizes(scores, labels);
  const double total_pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  if (total_pos == 0) throw UndefinedMetric("average precision needs at least one positive");
  const auto idx = descending(scores);
  double tp = 0, fp = 0, prev_recall = 0, ap = 0;
  std::size_t k = 0;
  while (k < idx.size()) {
    std::size_t end = k;
    while (end < idx.size() && scores[idx[end]] == scores[idx[k]]) {
      (labels[idx[end]] ? tp : fp) += 1;
      ++end;
    }
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    k = end;
  }
  return ap;
}

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw UndefinedMetric("quantile of an empty set");
  if (!(q >= 0 && q <= 1)) throw ContractViolation("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::optional<GapStats> gap_stats(std::vector<double> gaps) {
  if (gaps.empty()) return std::nullopt;
  GapStats s;
  s.count = gaps.size();
  std::sort(gaps.begin(), gaps.end());
  s.mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
  s.q3 = quantile_linear(std::move(gaps), 0.75);
  return s;
}

CompGapReport comp_gap_stats(std::span<const double> scores, const std::vector<ComparablePair>& pairs) {
  std::array<std::array<std::vector<double>, 2>, 3> by_rel;
  std::array<std::vector<double>, 2> headline;
  for (const auto& p : pairs) {
    if (p.i >= scores.size() || p.j >= scores.size()) throw ContractViolation("pair index outside the scores");
    const double g = std::abs(scores[p.i] - scores[p.j]) * 100.0;
    const int cls = p.label ? 0 : 1;
    by_rel[static_cast<int>(p.relation)][cls].push_back(g);
    if (p.relation != SensitiveRelation::kNoneDiffer) headline[cls].push_back(g);
  }
  CompGapReport r;
  r.headline = {gap_stats(std::move(headline[0])), gap_stats(std::move(headline[1]))};
  for (int k = 0; k < 3; ++k) r.by_relation[k] = {gap_stats(std::move(by_rel[k][0])), gap_stats(std::move(by_rel[k][1]))};
  return r;
}

ClassificationStats classification_stats(std::span<const double> scores, std::span<const int> labels,
                                         double threshold) {
  check_sizes(scores, labels);
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const bool pred = scores[k] >= threshold;
    const bool truth = labels[k] != 0;
    if (pred && truth) ++tp;
    else if (pred) ++fp;
    else if (truth) ++fn;
    else ++tn;
  }
  ClassificationStats s;
  const double n = tp + tn + fp + fn;
  s.accuracy = n > 0 ? 100.0 * (tp + tn) / n : 0.0;
  std::vector<double> recalls;
  if (tp + fn > 0) recalls.push_back(tp / (tp + fn));
  if (tn + fp > 0) recalls.push_back(tn / (tn + fp));
  s.balanced_accuracy =
      recalls.empty() ? 0.0 : 100.0 * std::accumulate(recalls.begin(), recalls.end(), 0.0) / recalls.size();
  s.f1 = (2 * tp + fp + fn) > 0 ? 100.0 * 2 * tp / (2 * tp + fp + fn) : 0.0;
  return s;
}

FairnessReport evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                               const std::vector<ComparablePair>& test_pairs) {
  FairnessReport r;
  r.roc = 100.0 * roc_auc(scores, labels);
  r.ap = 100.0 * average_precision(scores, labels);
  r.classification = classification_stats(scores, labels);
  r.comp = comp_gap_stats(scores, test_pairs);
  return r;
}

namespace {

std::optional<GapStats> mean_gap(const std::vector<const std::optional<GapStats>*>& xs) {
  GapStats acc;
  for (const auto* x : xs) {
    if (!x->has_value()) return std::nullopt;
    acc.count += (*x)->count;
    acc.mean += (*x)->mean;
    acc.q3 += (*x)->q3;
  }
  const double n = static_cast<double>(xs.size());
  acc.count = static_cast<std::size_t>(std::llround(static_cast<double>(acc.count) / n));
  acc.mean /= n;
  acc.q3 /= n;
  return acc;
}

GapPair mean_pair(const std::vector<const GapPair*>& xs) {
  std::vector<const std::optional<GapStats>*> pos, neg;
  for (const auto* x : xs) {
    pos.push_back(&x->positive);
    neg.push_back(&x->negative);
  }
  return {mean_gap(pos), mean_gap(neg)};
}

nlohmann::json gap_json(const std::optional<GapStats>& g) {
  if (!g) return nullptr;
  return {{"count", g->count}, {"mean", g->mean}, {"q3", g->q3}};
}

nlohmann::json pair_json(const GapPair& p) {
  return {{"positive", gap_json(p.positive)}, {"negative", gap_json(p.negative)}};
}

nlohmann::json report_json(const FairnessReport& r) {
  nlohmann::json rel;
  for (int k = 0; k < 3; ++k) rel[relation_name(static_cast<SensitiveRelation>(k))] = pair_json(r.comp.by_relation[k]);
  return {{"regime", r.regime},
          {"classifier", r.classifier},
          {"seeds", r.seeds},
          {"antidote_percentage", r.antidote_percentage},
          {"roc", r.roc},
          {"ap", r.ap},
          {"accuracy", r.classification.accuracy},
          {"balanced_accuracy", r.classification.balanced_accuracy},
          {"f1", r.classification.f1},
          {"comparable", pair_json(r.comp.headline)},
          {"by_relation", rel}};
}

std::string cell(const std::optional<GapStats>& g, bool q3) {
  if (!g) return "";
  return fmt::format("{:.6f}", q3 ? g->q3 : g->mean);
}

}  // namespace

FairnessReport average_reports(const std::vector<FairnessReport>& reports) {
  if (reports.empty()) throw ContractViolation("average_reports: no reports");
  FairnessReport out = reports.front();
  const double n = static_cast<double>(reports.size());
  out.seeds = 0;
  out.roc = out.ap = out.antidote_percentage = 0.0;
  out.classification = {};
  std::vector<const GapPair*> head;
  std::array<std::vector<const GapPair*>, 3> rel;
  for (const auto& r : reports) {
    out.seeds += r.seeds;
    out.roc += r.roc / n;
    out.ap += r.ap / n;
    out.antidote_percentage += r.antidote_percentage / n;
    out.classification.accuracy += r.classification.accuracy / n;
    out.classification.balanced_accuracy += r.classification.balanced_accuracy / n;
    out.classification.f1 += r.classification.f1 / n;
    head.push_back(&r.comp.headline);
    for (int k = 0; k < 3; ++k) rel[k].push_back(&r.comp.by_relation[k]);
  }
  out.comp.headline = mean_pair(head);
  for (int k = 0; k < 3; ++k) out.comp.by_relation[k] = mean_pair(rel[k]);
  return out;
}

std::string report_to_json(const FairnessReport& report) {
  nlohmann::json j = report_json(report);
  j["format_version"] = 1;
  return j.dump(2) + "\n";
}

std::string reports_to_json(const std::vector<FairnessReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return nlohmann::json{{"format_version", 1}, {"reports", arr}}.dump(2) + "\n";
}

std::string report_csv_header() {
  return "regime,classifier,seeds,antidote_percentage,roc,ap,pos_mean,pos_q3,neg_mean,neg_q3,accuracy,"
         "balanced_accuracy,f1\n";
}

std::string report_csv_row(const FairnessReport& r) {
  const auto& h = r.comp.headline;
  return fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{},{},{},{},{:.6f},{:.6f},{:.6f}\n", r.regime, r.classifier,
                     r.seeds, r.antidote_percentage, r.roc, r.ap, cell(h.positive, false), cell(h.positive, true),
                     cell(h.negative, false), cell(h.negative, true), r.classification.accuracy,
                     r.classification.balanced_accuracy, r.classification.f1);
}

}  // namespace antidote
