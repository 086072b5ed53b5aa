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

#include "antidote/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/special_functions/digamma.hpp>

namespace antidote {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_normal(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

// k-means++ seeding over the values.
std::vector<double> seed_means(std::span<const double> values, int k, Rng& rng) {
  std::vector<double> centers;
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  centers.push_back(values[pick(rng)]);
  std::vector<double> dist(values.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      dist[i] = best;
      total += best;
    }
    if (total <= 0.0) break;
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng), acc = 0.0;
    std::size_t chosen = values.size() - 1;
    for (std::size_t i = 0; i < values.size(); ++i) {
      acc += dist[i];
      if (acc >= target && dist[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    centers.push_back(values[chosen]);
  }
  return centers;
}

void sort_by_mean(ColumnGMM& g) {
  std::vector<std::size_t> order(g.means.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.means[a] < g.means[b]; });
  ColumnGMM s{g.column, {}, {}, {}};
  for (auto i : order) {
    s.weights.push_back(g.weights[i]);
    s.means.push_back(g.means[i]);
    s.stds.push_back(g.stds[i]);
  }
  g = std::move(s);
}

void normalize(std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
}

}  // namespace

void ColumnGMM::validate(int max_modes) const {
  if (weights.empty() || weights.size() != means.size() || weights.size() != stds.size()) {
    throw ContractViolation("ColumnGMM: inconsistent component arrays");
  }
  if (modes() > max_modes) throw ContractViolation("ColumnGMM: too many modes");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(stds[k] > 0.0) || !std::isfinite(means[k]) || !(weights[k] >= 0.0)) {
      throw ContractViolation("ColumnGMM: invalid component parameters");
    }
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("ColumnGMM: weights do not sum to 1");
}

double gmm_log_likelihood(std::span<const double> values, const ColumnGMM& gmm) {
  double ll = 0.0;
  std::vector<double> lp(gmm.modes());
  for (double x : values) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < gmm.modes(); ++k) {
      lp[k] = std::log(gmm.weights[k]) + log_normal(x, gmm.means[k], gmm.stds[k]);
      mx = std::max(mx, lp[k]);
    }
    double s = 0.0;
    for (double l : lp) s += std::exp(l - mx);
    ll += mx + std::log(s);
  }
  return ll;
}

ColumnGMM fit_gmm(std::span<const double> values, const GmmOptions& options, std::uint64_t seed,
                  int column, GmmFitTrace* trace) {
  if (values.empty()) throw ContractViolation("fit_gmm: no values");
  if (options.max_modes < 1) throw ContractViolation("fit_gmm: max_modes must be positive");

  std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() == 1) {
    log_warning("fit_gmm: column " + std::to_string(column) + " is constant; single floored mode");
    return ColumnGMM{column, {1.0}, {values[0]}, {options.std_floor}};
  }

  const int k0 = std::min<int>(options.max_modes, static_cast<int>(distinct.size()));
  const std::size_t n = values.size();
  Rng rng(seed);

  // Hard k-means assignment as the starting responsibilities.
  std::vector<double> centers = seed_means(values, k0, rng);
  std::vector<int> label(n, 0);
  for (int round = 0; round < 20; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < static_cast<int>(centers.size()); ++c)
        if (std::abs(values[i] - centers[c]) < std::abs(values[i] - centers[best])) best = c;
      label[i] = best;
    }
    std::vector<double> sum(centers.size(), 0.0), cnt(centers.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += values[i];
      cnt[label[i]] += 1.0;
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (cnt[c] > 0) centers[c] = sum[c] / cnt[c];
  }
  int k = static_cast<int>(centers.size());
  std::vector<double> resp(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) resp[i * k + label[i]] = 1.0;

  // Priors: symmetric Dirichlet on weights, Normal-Gamma on each component
  // centred on the column mean with the column variance as scale.
  const double mean0 = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double var0 = 0.0;
  for (double x : values) var0 += (x - mean0) * (x - mean0);
  var0 = std::max(var0 / static_cast<double>(n), options.std_floor * options.std_floor);
  const double alpha0 = options.weight_concentration;
  const double beta0 = 1.0;
  const double nu0 = 1.0;
  const double reg = options.std_floor * options.std_floor;

  std::vector<double> alpha, beta, mu, nu, cov;
  auto m_step = [&] {
    alpha.assign(k, 0.0);
    beta.assign(k, 0.0);
    mu.assign(k, 0.0);
    nu.assign(k, 0.0);
    cov.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
      double nk = 10.0 * std::numeric_limits<double>::epsilon(), sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + c];
        sx += resp[i * k + c] * values[i];
      }
      const double xbar = sx / nk;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += resp[i * k + c] * (values[i] - xbar) * (values[i] - xbar);
      const double sk = ss / nk + reg;
      alpha[c] = alpha0 + nk;
      beta[c] = beta0 + nk;
      mu[c] = (beta0 * mean0 + nk * xbar) / beta[c];
      nu[c] = nu0 + nk;
      cov[c] = (var0 + nk * sk + nk * beta0 / beta[c] * (xbar - mean0) * (xbar - mean0)) / nu[c];
    }
  };
  m_step();

  std::vector<double> log_resp(n * k);
  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double alpha_sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    std::vector<double> bias(k), inv_cov(k);
    for (int c = 0; c < k; ++c) {
      inv_cov[c] = 1.0 / cov[c];
      bias[c] = boost::math::digamma(alpha[c]) - boost::math::digamma(alpha_sum) - kLogSqrt2Pi +
                0.5 * std::log(inv_cov[c]) - 0.5 * std::log(nu[c]) +
                0.5 * (std::log(2.0) + boost::math::digamma(0.5 * nu[c]) - 1.0 / beta[c]);
    }
    log_resp.assign(n * k, 0.0);
    double entropy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = values[i] - mu[c];
        log_resp[i * k + c] = bias[c] - 0.5 * d * d * inv_cov[c];
        mx = std::max(mx, log_resp[i * k + c]);
      }
      double s = 0.0;
      for (int c = 0; c < k; ++c) s += std::exp(log_resp[i * k + c] - mx);
      const double lse = mx + std::log(s);
      for (int c = 0; c < k; ++c) {
        log_resp[i * k + c] -= lse;
        resp[i * k + c] = std::exp(log_resp[i * k + c]);
        entropy -= resp[i * k + c] * log_resp[i * k + c];
      }
    }
    m_step();

    // Variational lower bound up to an additive constant.
    double bound = entropy;
    double new_alpha_sum = 0.0;
    for (int c = 0; c < k; ++c) {
      const double log_det_chol = -0.5 * std::log(cov[c]) - 0.5 * std::log(nu[c]);
      bound += nu[c] * log_det_chol + 0.5 * nu[c] * std::log(2.0) + std::lgamma(0.5 * nu[c]);
      bound += std::lgamma(alpha[c]) - 0.5 * std::log(beta[c]);
      new_alpha_sum += alpha[c];
    }
    bound -= std::lgamma(new_alpha_sum);

    std::vector<int> keep;
    for (int c = 0; c < k; ++c)
      if (alpha[c] / new_alpha_sum >= options.prune_weight) keep.push_back(c);
    const bool pruned = static_cast<int>(keep.size()) < k;
    if (trace) {
      ColumnGMM snapshot{column, {}, {}, {}};
      for (int c = 0; c < k; ++c) {
        snapshot.weights.push_back(alpha[c] / new_alpha_sum);
        snapshot.means.push_back(mu[c]);
        snapshot.stds.push_back(std::max(std::sqrt(cov[c]), options.std_floor));
      }
      trace->objective.push_back(bound);
      trace->log_likelihood.push_back(gmm_log_likelihood(values, snapshot));
      trace->pruned.push_back(pruned);
    }
    if (pruned) {
      auto pick = [&](const std::vector<double>& v) {
        std::vector<double> out;
        for (int c : keep) out.push_back(v[c]);
        return out;
      };
      std::vector<double> r(n * keep.size());
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < keep.size(); ++j) s += resp[i * k + keep[j]];
        for (std::size_t j = 0; j < keep.size(); ++j)
          r[i * keep.size() + j] = s > 0.0 ? resp[i * k + keep[j]] / s : 1.0 / static_cast<double>(keep.size());
      }
      alpha = pick(alpha);
      beta = pick(beta);
      mu = pick(mu);
      nu = pick(nu);
      cov = pick(cov);
      resp = std::move(r);
      k = static_cast<int>(keep.size());
      previous = -std::numeric_limits<double>::infinity();
      continue;
    }
    if (std::abs(bound - previous) <= options.tolerance * std::abs(bound)) break;
    previous = bound;
  }

  ColumnGMM g{column, {}, {}, {}};
  for (int c = 0; c < k; ++c) {
    g.weights.push_back(alpha[c]);
    g.means.push_back(mu[c]);
    g.stds.push_back(std::max(std::sqrt(cov[c]), options.std_floor));
  }
  normalize(g.weights);
  sort_by_mean(g);
  g.validate(options.max_modes);
  return g;
}

std::vector<double> mode_probs(double value, const ColumnGMM& gmm) {
  std::vector<double> p(gmm.modes());
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < gmm.modes(); ++k) {
    p[k] = std::log(gmm.weights[k]) + log_normal(value, gmm.means[k], gmm.stds[k]);
    mx = std::max(mx, p[k]);
  }
  if (!std::isfinite(mx)) {
    log_warning("mode_probs: all mode densities underflow; returning uniform");
    std::fill(p.begin(), p.end(), 1.0 / gmm.modes());
    return p;
  }
  double s = 0.0;
  for (auto& x : p) s += (x = std::exp(x - mx));
  for (auto& x : p) x /= s;
  return p;
}

int ModeCode::mode() const {
  int idx = -1;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k] == 1.0) {
      if (idx >= 0) throw ContractViolation("mode indicator is not one-hot");
      idx = static_cast<int>(k);
    } else if (e[k] != 0.0) {
      throw ContractViolation("mode indicator is not one-hot");
    }
  }
  if (idx < 0) throw ContractViolation("mode indicator is not one-hot");
  return idx;
}

ModeCode encode_with_mode(double value, const ColumnGMM& gmm, int mode) {
  ModeCode code;
  code.e.assign(gmm.modes(), 0.0);
  code.e.at(mode) = 1.0;
  code.v = std::clamp((value - gmm.means[mode]) / (4.0 * gmm.stds[mode]), -1.0, 1.0);
  return code;
}

ModeCode encode_continuous(double value, const ColumnGMM& gmm, Rng& rng) {
  const auto p = mode_probs(value, gmm);
  std::discrete_distribution<int> pick(p.begin(), p.end());
  return encode_with_mode(value, gmm, pick(rng));
}

ModeCode encode_continuous_argmax(double value, const ColumnGMM& gmm) {
  const auto p = mode_probs(value, gmm);
  const auto k = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
  return encode_with_mode(value, gmm, static_cast<int>(k));
}

double decode_continuous_unclipped(const ModeCode& code, const ColumnGMM& gmm) {
  if (static_cast<int>(code.e.size()) != gmm.modes()) {
    throw ContractViolation("mode indicator width does not match the mixture");
  }
  const int k = code.mode();
  return code.v * 4.0 * gmm.stds[k] + gmm.means[k];
}

double decode_continuous(const ModeCode& code, const ColumnGMM& gmm) {
  return std::clamp(decode_continuous_unclipped(code, gmm), 0.0, 1.0);
}

bool operator==(const Slice& a, const Slice& b) {
  return a.kind == b.kind && a.feature == b.feature && a.offset == b.offset && a.width == b.width;
}

ReRepresentation::ReRepresentation(std::vector<ColumnGMM> gmms, std::vector<int> discrete_sizes,
                                   std::vector<int> sensitive_sizes)
    : gmms_(std::move(gmms)),
      discrete_sizes_(std::move(discrete_sizes)),
      sensitive_sizes_(std::move(sensitive_sizes)) {
  int off = 0;
  for (std::size_t i = 0; i < gmms_.size(); ++i) {
    gmms_[i].validate();
    slices_.push_back({SliceKind::kValue, static_cast<int>(i), off, 1});
    off += 1;
    slices_.push_back({SliceKind::kMode, static_cast<int>(i), off, gmms_[i].modes()});
    off += gmms_[i].modes();
  }
  for (std::size_t i = 0; i < discrete_sizes_.size(); ++i) {
    slices_.push_back({SliceKind::kDiscrete, static_cast<int>(i), off, discrete_sizes_[i]});
    off += discrete_sizes_[i];
  }
  sensitive_offset_ = off;
  for (std::size_t i = 0; i < sensitive_sizes_.size(); ++i) {
    slices_.push_back({SliceKind::kSensitive, static_cast<int>(i), off, sensitive_sizes_[i]});
    off += sensitive_sizes_[i];
  }
  width_ = off;
}

ReRepresentation ReRepresentation::fit(const EncodedDataset& train, const GmmOptions& options,
                                       std::uint64_t seed) {
  std::vector<ColumnGMM> gmms;
  for (int c = 0; c < train.num_continuous(); ++c) {
    std::vector<double> col(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) col[r] = train.continuous(r, c);
    gmms.push_back(fit_gmm(col, options, derive_seed(seed, "gmm", c), c));
  }
  return ReRepresentation(std::move(gmms), train.discrete_sizes, train.sensitive_sizes);
}

Eigen::RowVectorXd ReRepresentation::encode_row(const EncodedDataset& data, std::size_t row,
                                                Rng* rng) const {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(width_);
  int off = 0;
  for (std::size_t i = 0; i < gmms_.size(); ++i) {
    const double c = data.continuous(row, i);
    const ModeCode code = rng ? encode_continuous(c, gmms_[i], *rng)
                              : encode_continuous_argmax(c, gmms_[i]);
    out(off) = code.v;
    out(off + 1 + code.mode()) = 1.0;
    off += 1 + gmms_[i].modes();
  }
  out.segment(off, data.discrete.cols()) = data.discrete.row(row);
  off += static_cast<int>(data.discrete.cols());
  out.segment(off, data.sensitive.cols()) = data.sensitive.row(row);
  return out;
}

Matrix ReRepresentation::encode(const EncodedDataset& data, Rng* rng) const {
  if (data.num_continuous() != static_cast<int>(gmms_.size()) ||
      data.discrete_sizes != discrete_sizes_ || data.sensitive_sizes != sensitive_sizes_) {
    throw ContractViolation("ReRepresentation: dataset layout does not match");
  }
  Matrix out(static_cast<Eigen::Index>(data.rows()), width_);
  for (std::size_t r = 0; r < data.rows(); ++r) out.row(r) = encode_row(data, r, rng);
  return out;
}

EncodedDataset ReRepresentation::decode(const Matrix& rows, const std::vector<int>& labels) const {
  if (rows.cols() != width_ || rows.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ContractViolation("ReRepresentation::decode: shape mismatch");
  }
  const auto n = rows.rows();
  EncodedDataset d;
  d.split = Split::kSynthetic;
  d.labels = labels;
  d.discrete_sizes = discrete_sizes_;
  d.sensitive_sizes = sensitive_sizes_;
  d.continuous.resize(n, static_cast<Eigen::Index>(gmms_.size()));
  int dw = 0, sw = 0;
  for (int s : discrete_sizes_) dw += s;
  for (int s : sensitive_sizes_) sw += s;
  d.discrete = Matrix::Zero(n, dw);
  d.sensitive = Matrix::Zero(n, sw);
  int doff = 0, soff = 0;
  for (const auto& s : slices_) {
    for (Eigen::Index r = 0; r < n; ++r) {
      Eigen::Index best = 0;
      switch (s.kind) {
        case SliceKind::kValue:
          break;
        case SliceKind::kMode: {
          rows.row(r).segment(s.offset, s.width).maxCoeff(&best);
          const auto& g = gmms_[s.feature];
          const double v = std::clamp(rows(r, s.offset - 1), -1.0, 1.0);
          d.continuous(r, s.feature) = std::clamp(v * 4.0 * g.stds[best] + g.means[best], 0.0, 1.0);
          break;
        }
        case SliceKind::kDiscrete:
          rows.row(r).segment(s.offset, s.width).maxCoeff(&best);
          d.discrete(r, doff + best) = 1.0;
          break;
        case SliceKind::kSensitive:
          rows.row(r).segment(s.offset, s.width).maxCoeff(&best);
          d.sensitive(r, soff + best) = 1.0;
          break;
      }
    }
    if (s.kind == SliceKind::kDiscrete) doff += s.width;
    if (s.kind == SliceKind::kSensitive) soff += s.width;
  }
  return d;
}

}  // namespace antidote
