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

#include "antidote/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "antidote/nn/optim.hpp"

namespace antidote {

namespace {

constexpr std::uint32_t kModelVersion = 1;

double log1p_exp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

nn::NetSpec nn_spec(int input, const std::vector<int>& hidden) {
  nn::NetSpec spec;
  spec.input_width = input;
  for (int h : hidden) {
    spec.layers.push_back(nn::LayerSpec::linear(h));
    spec.layers.push_back(nn::LayerSpec::relu());
  }
  spec.layers.push_back(nn::LayerSpec::linear(1));
  return spec;
}

Vector nn_logits(nn::Sequential<double>& net, const Matrix& x) {
  const auto out = net.forward(nn::Tensor<double>::constant(x), nullptr);
  return out.value().col(0);
}

}  // namespace

const char* classifier_name(ClassifierKind kind) {
  return kind == ClassifierKind::kLogReg ? "lr" : "nn";
}

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "lr" || name == "logreg") return ClassifierKind::kLogReg;
  if (name == "nn") return ClassifierKind::kNeuralNet;
  throw ConfigError("unknown classifier '" + std::string(name) + "' (expected lr or nn)");
}

Matrix ClassifierModel::features(const EncodedDataset& data) const {
  const Matrix x = drop_sensitive_ ? drop_sensitive(data).joined() : data.joined();
  return standardize_ ? standardizer_.transform(x) : x;
}

Vector ClassifierModel::predict(const EncodedDataset& data) const { return predict_features(features(data)); }

Vector ClassifierModel::predict_features(const Matrix& x) const {
  Vector z;
  if (kind_ == ClassifierKind::kLogReg) {
    if (x.cols() != lr_weights_.size()) throw ContractViolation("classifier input width mismatch");
    z = (x * lr_weights_).array() + lr_intercept_;
  } else {
    z = nn_logits(*net_, x);
  }
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

double ClassifierModel::lr_gradient_norm(const Matrix& x, const std::vector<int>& y, double l2) const {
  const Vector p = predict_features(x);
  Vector r(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) r(i) = p(i) - y[i];
  Vector g(lr_weights_.size() + 1);
  g.head(lr_weights_.size()) = x.transpose() * r + l2 * lr_weights_;
  g(lr_weights_.size()) = r.sum();
  return g.norm();
}

void ClassifierModel::save(ByteWriter& w) const {
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(kind_));
  w.put<std::uint8_t>(drop_sensitive_);
  w.put<std::uint8_t>(standardize_);
  w.put_matrix(standardizer_.mean());
  w.put_matrix(standardizer_.scale());
  w.put_matrix(lr_weights_.transpose());
  w.put<double>(lr_intercept_);
  w.put_vector<std::int32_t>(std::vector<std::int32_t>(net_hidden_.begin(), net_hidden_.end()));
  if (kind_ == ClassifierKind::kNeuralNet) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(net_->spec().input_width));
    net_->save(w);
  }
}

ClassifierModel ClassifierModel::load(ByteReader& r) {
  if (r.get<std::uint32_t>() != kModelVersion) throw ConfigError("unsupported classifier format version");
  ClassifierModel m;
  const auto kind = r.get<std::uint8_t>();
  if (kind > 1) throw ConfigError("unknown classifier kind in payload");
  m.kind_ = static_cast<ClassifierKind>(kind);
  m.drop_sensitive_ = r.get<std::uint8_t>() != 0;
  m.standardize_ = r.get<std::uint8_t>() != 0;
  const Matrix mean = r.get_matrix();
  const Matrix scale = r.get_matrix();
  m.standardizer_ = Standardizer(mean.row(0), scale.row(0));
  if (mean.rows() == 0) m.standardizer_ = Standardizer();
  const Matrix w = r.get_matrix();
  m.lr_weights_ = w.rows() ? Vector(w.row(0).transpose()) : Vector();
  m.lr_intercept_ = r.get<double>();
  const auto hidden = r.get_vector<std::int32_t>();
  m.net_hidden_.assign(hidden.begin(), hidden.end());
  if (m.kind_ == ClassifierKind::kNeuralNet) {
    const int input = static_cast<int>(r.get<std::uint32_t>());
    Rng rng(0);
    m.net_ = std::make_shared<nn::Sequential<double>>(nn_spec(input, m.net_hidden_), rng);
    m.net_->load(r);
  }
  return m;
}

ClassifierModel train_logreg(const Matrix& x, const std::vector<int>& y, const LogRegOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ContractViolation("train_logreg: label count mismatch");
  if (!(options.l2 > 0)) throw ConfigError("logistic regression needs a positive l2 strength");
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Vector yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[i];

  // theta = (w, b); the intercept is not penalised.
  Vector theta = Vector::Zero(d + 1);
  auto objective = [&](const Vector& t) {
    const Vector z = (x * t.head(d)).array() + t(d);
    double f = 0.5 * options.l2 * t.head(d).squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) f += log1p_exp(z(i)) - yv(i) * z(i);
    return f;
  };
  double f = objective(theta);
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector z = (x * theta.head(d)).array() + theta(d);
    Vector p(n), h(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(z(i));
      h(i) = p(i) * (1.0 - p(i));
    }
    Vector g(d + 1);
    g.head(d) = x.transpose() * (p - yv) + options.l2 * theta.head(d);
    g(d) = (p - yv).sum();
    if (g.norm() < options.tolerance) break;
    Matrix hess(d + 1, d + 1);
    const Matrix xh = x.array().colwise() * h.array();
    hess.topLeftCorner(d, d) = x.transpose() * xh;
    hess.topLeftCorner(d, d).diagonal().array() += options.l2;
    hess.topRightCorner(d, 1) = xh.colwise().sum().transpose();
    hess.bottomLeftCorner(1, d) = xh.colwise().sum();
    hess(d, d) = h.sum() + 1e-12;
    const Vector step = hess.ldlt().solve(g);
    double t = 1.0;
    Vector next = theta - step;
    double fn = objective(next);
    while (fn > f && t > 1e-10) {
      t *= 0.5;
      next = theta - t * step;
      fn = objective(next);
    }
    if (!next.allFinite()) throw NumericalError("logistic regression diverged");
    if (fn > f) break;  // no further progress is representable
    theta = next;
    f = fn;
  }
  ClassifierModel m;
  m.kind_ = ClassifierKind::kLogReg;
  m.lr_weights_ = theta.head(d);
  m.lr_intercept_ = theta(d);
  return m;
}

ClassifierModel train_nn(const Matrix& x, const std::vector<int>& y, const NeuralNetOptions& options,
                         std::uint64_t seed, const CandidateIndex* candidates, int max_candidates) {
  const Eigen::Index n = x.rows();
  if (static_cast<std::size_t>(n) != y.size()) throw ContractViolation("train_nn: label count mismatch");
  if (n == 0) throw ContractViolation("train_nn: no training rows");
  if (candidates && candidates->by_row.size() != static_cast<std::size_t>(n)) {
    throw ContractViolation("train_nn: candidate index does not match the training rows");
  }
  Rng init = make_rng(seed, "nn.init");
  auto net = std::make_shared<nn::Sequential<double>>(nn_spec(static_cast<int>(x.cols()), options.hidden), init);
  nn::Sgd<double> opt(net->parameters(), {options.learning_rate, options.weight_decay, options.halve_every});
  Rng rng = make_rng(seed, "nn.batches");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const auto batch = static_cast<std::size_t>(std::min<Eigen::Index>(options.batch_size, n));

  for (int step = 0; step < options.iterations; ++step) {
    std::vector<std::size_t> rows;
    rows.reserve(batch);
    while (rows.size() < batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      rows.push_back(order[cursor++]);
    }
    const double inv = 1.0 / static_cast<double>(batch);
    std::vector<std::size_t> chosen;  // candidate rows
    std::vector<int> chosen_labels;
    if (candidates) {
      std::vector<std::size_t> pool_rows;
      std::vector<std::size_t> pool_owner;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        std::vector<std::size_t> pool = candidates->by_row[rows[k]];
        if (max_candidates > 0 && pool.size() > static_cast<std::size_t>(max_candidates)) {
          std::shuffle(pool.begin(), pool.end(), rng);
          pool.resize(max_candidates);
        }
        for (auto c : pool) {
          pool_rows.push_back(c);
          pool_owner.push_back(k);
        }
      }
      if (!pool_rows.empty()) {
        Matrix cx(static_cast<Eigen::Index>(pool_rows.size()), x.cols());
        for (std::size_t c = 0; c < pool_rows.size(); ++c) cx.row(c) = candidates->candidates.row(pool_rows[c]);
        const Vector z = nn_logits(*net, cx);
        std::vector<double> best(rows.size(), -1.0);
        std::vector<std::size_t> arg(rows.size(), 0);
        for (std::size_t c = 0; c < pool_rows.size(); ++c) {
          const std::size_t k = pool_owner[c];
          const double loss = log1p_exp(z(c)) - y[rows[k]] * z(c);
          if (loss > best[k]) {
            best[k] = loss;
            arg[k] = pool_rows[c];
          }
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
          if (best[k] >= 0.0) {
            chosen.push_back(arg[k]);
            chosen_labels.push_back(y[rows[k]]);
          }
        }
      }
    }
    const auto total = static_cast<Eigen::Index>(rows.size() + chosen.size());
    Matrix bx(total, x.cols());
    Matrix by(total, 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      bx.row(k) = x.row(rows[k]);
      by(k, 0) = y[rows[k]];
    }
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      bx.row(rows.size() + k) = candidates->candidates.row(chosen[k]);
      by(rows.size() + k, 0) = chosen_labels[k];
    }
    const Matrix w = Matrix::Constant(total, 1, inv);
    opt.zero_grad();
    const auto logits = net->forward(nn::Tensor<double>::constant(bx), nullptr);
    nn::weighted_bce_with_logits(logits, by, w).backward();
    opt.step();
  }
  ClassifierModel m;
  m.kind_ = ClassifierKind::kNeuralNet;
  m.net_hidden_ = options.hidden;
  m.net_ = std::move(net);
  return m;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kBase:
      return "base";
    case Regime::kDis:
      return "dis";
    case Regime::kAnti:
      return "anti";
    case Regime::kAntiDis:
      return "anti+dis";
    case Regime::kAntiDro:
      return "antidro";
    case Regime::kAntiOnly:
      return "anti-only";
    case Regime::kRandomComparable:
      return "random-comparable";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  for (Regime r : {Regime::kBase, Regime::kDis, Regime::kAnti, Regime::kAntiDis, Regime::kAntiDro,
                   Regime::kAntiOnly, Regime::kRandomComparable}) {
    if (name == regime_name(r)) return r;
  }
  throw ConfigError("unknown regime '" + std::string(name) + "'");
}

void RegimeConfig::validate() const {
  if (regime == Regime::kAntiDro && kind != ClassifierKind::kNeuralNet) {
    throw ConfigError("antidro requires the nn classifier");
  }
  if (!(logreg.l2 > 0) || logreg.max_iterations < 1) throw ConfigError("invalid logistic regression options");
  if (nn.iterations < 0 || nn.batch_size < 1 || !(nn.learning_rate > 0) || nn.weight_decay < 0 ||
      nn.halve_every < 0) {
    throw ConfigError("invalid neural network options");
  }
  for (int h : nn.hidden) {
    if (h < 1) throw ConfigError("hidden widths must be positive");
  }
  if (max_candidates < 0) throw ConfigError("candidate cap must be non-negative");
}

ClassifierModel train_regime(const RegimeConfig& cfg, const EncodedDataset& train, const AntidoteSet* extra,
                             std::uint64_t seed) {
  cfg.validate();
  const Regime r = cfg.regime;
  const bool needs_extra = r != Regime::kBase && r != Regime::kDis;
  if (needs_extra && !extra) throw ConfigError(std::string("regime ") + regime_name(r) + " needs generated rows");
  const bool drop = r == Regime::kDis || r == Regime::kAntiDis;

  auto view = [&](const EncodedDataset& d) { return drop ? drop_sensitive(d).joined() : d.joined(); };
  Matrix x;
  std::vector<int> y;
  Matrix reference;
  if (r == Regime::kAntiOnly) {
    x = view(extra->rows);
    y = extra->rows.labels;
    reference = x;
  } else {
    reference = view(train);
    x = reference;
    y = train.labels;
    if (r == Regime::kAnti || r == Regime::kAntiDis || r == Regime::kRandomComparable) {
      const Matrix ex = view(extra->rows);
      Matrix joined(x.rows() + ex.rows(), x.cols());
      joined.topRows(x.rows()) = x;
      if (ex.rows()) joined.bottomRows(ex.rows()) = ex;
      x = std::move(joined);
      y.insert(y.end(), extra->rows.labels.begin(), extra->rows.labels.end());
    }
  }
  const Standardizer st = Standardizer::fit(reference);
  const Matrix xs = st.transform(x);

  ClassifierModel m;
  if (cfg.kind == ClassifierKind::kLogReg) {
    m = train_logreg(xs, y, cfg.logreg);
  } else if (r == Regime::kAntiDro) {
    CandidateIndex index;
    index.candidates = st.transform(view(extra->rows));
    index.by_row.resize(train.rows());
    for (std::size_t k = 0; k < extra->source.size(); ++k) index.by_row.at(extra->source[k]).push_back(k);
    m = train_nn(xs, y, cfg.nn, seed, &index, cfg.max_candidates);
  } else {
    m = train_nn(xs, y, cfg.nn, seed);
  }
  m.drop_sensitive_ = drop;
  m.standardizer_ = st;
  m.standardize_ = true;
  return m;
}

AntidoteSet random_comparable(const EncodedDataset& data, const ComparabilityConfig& cfg, std::size_t count,
                              Rng& rng) {
  cfg.validate(data.num_discrete());
  if (data.num_sensitive() == 0) throw ContractViolation("random_comparable needs sensitive features");
  AntidoteSet out;
  if (count == 0 || data.rows() == 0) return empty_antidote_set(data);
  std::uniform_int_distribution<std::size_t> pick_row(0, data.rows() - 1);
  std::uniform_int_distribution<int> pick_k(0, cfg.max_discrete_diff);
  std::uniform_real_distribution<double> jitter(-cfg.max_continuous_gap, cfg.max_continuous_gap);
  const int nd = data.num_discrete();
  const int ns = data.num_sensitive();

  std::vector<std::size_t> sources(count);
  for (auto& s : sources) s = pick_row(rng);
  AntidoteSet set;
  set.rows = select_rows(data, sources);
  set.rows.split = Split::kSynthetic;
  set.source = sources;
  std::vector<int> doff(nd + 1, 0), soff(ns + 1, 0);
  for (int f = 0; f < nd; ++f) doff[f + 1] = doff[f] + data.discrete_sizes[f];
  for (int f = 0; f < ns; ++f) soff[f + 1] = soff[f] + data.sensitive_sizes[f];

  std::vector<int> features(nd);
  std::iota(features.begin(), features.end(), 0);
  for (std::size_t r = 0; r < count; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const int k = pick_k(rng);
    std::shuffle(features.begin(), features.end(), rng);
    for (int t = 0; t < k; ++t) {
      const int f = features[t];
      std::uniform_int_distribution<int> value(0, data.discrete_sizes[f] - 1);
      set.rows.discrete.row(row).segment(doff[f], data.discrete_sizes[f]).setZero();
      set.rows.discrete(row, doff[f] + value(rng)) = 1.0;
    }
    for (Eigen::Index c = 0; c < set.rows.continuous.cols(); ++c) {
      const double orig = set.rows.continuous(row, c);
      double v = std::clamp(orig + jitter(rng), 0.0, 1.0);
      while (std::abs(v - orig) > cfg.max_continuous_gap) v = std::nextafter(v, orig);
      set.rows.continuous(row, c) = v;
    }
    // Non-empty subset of sensitive features, each moved to a different value
    // where the feature has one.
    std::vector<int> codes = set.rows.sensitive_codes(r);
    std::vector<bool> change(ns, false);
    std::bernoulli_distribution coin(0.5);
    bool any = false;
    while (!any) {
      for (int f = 0; f < ns; ++f) {
        change[f] = coin(rng) && data.sensitive_sizes[f] > 1;
        any = any || change[f];
      }
      bool possible = false;
      for (int f = 0; f < ns; ++f) possible = possible || data.sensitive_sizes[f] > 1;
      if (!possible) break;
    }
    for (int f = 0; f < ns; ++f) {
      if (!change[f]) continue;
      std::uniform_int_distribution<int> other(0, data.sensitive_sizes[f] - 2);
      int v = other(rng);
      if (v >= codes[f]) ++v;
      codes[f] = v;
      set.rows.sensitive.row(row).segment(soff[f], data.sensitive_sizes[f]).setZero();
      set.rows.sensitive(row, soff[f] + v) = 1.0;
    }
    set.requested.push_back(combination_index(codes, data.sensitive_sizes));
  }
  return set;
}

EncodedDataset uniform_random_rows(const EncodedDataset& like, std::size_t count, Rng& rng) {
  EncodedDataset out = select_rows(like, {});
  out.split = Split::kSynthetic;
  const auto n = static_cast<Eigen::Index>(count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  out.continuous.resize(n, like.continuous.cols());
  out.discrete = Matrix::Zero(n, like.discrete.cols());
  out.sensitive = Matrix::Zero(n, like.sensitive.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < out.continuous.cols(); ++c) out.continuous(r, c) = unit(rng);
    int off = 0;
    for (int s : like.discrete_sizes) {
      out.discrete(r, off + std::uniform_int_distribution<int>(0, s - 1)(rng)) = 1.0;
      off += s;
    }
    off = 0;
    for (int s : like.sensitive_sizes) {
      out.sensitive(r, off + std::uniform_int_distribution<int>(0, s - 1)(rng)) = 1.0;
      off += s;
    }
    out.labels.push_back(coin(rng) ? 1 : 0);
  }
  return out;
}

}  // namespace antidote
