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

#include <cmath>
#include <random>

#include "antidote/binary_io.hpp"
#include "antidote/classifier.hpp"
#include "antidote/gan.hpp"
#include "test_util.hpp"

namespace antidote {
namespace {

// Labels follow the first continuous column and the sensitive attribute.
EncodedDataset learnable(std::uint64_t seed, std::size_t rows) {
  Rng rng(seed);
  auto d = testing::random_dataset(rng, rows, 2, {3, 2}, {2}, 40);
  std::bernoulli_distribution flip(0.1);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    const bool y = d.continuous(i, 0) + 0.3 * d.sensitive(i, 1) > 0.65;
    d.labels[r] = (y != flip(rng)) ? 1 : 0;
  }
  return d;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

NeuralNetOptions quick_nn() {
  NeuralNetOptions o;
  o.hidden = {16, 16};
  o.iterations = 300;
  o.batch_size = 32;
  return o;
}

TEST(LogReg, SeparableTwoPoints) {
  Matrix x(2, 1);
  x << -1, 1;
  const auto m = train_logreg(x, {0, 1}, LogRegOptions{});
  const Vector p = m.predict_features(x);
  EXPECT_LT(p(0), 0.5);
  EXPECT_GT(p(1), 0.5);
}

TEST(LogReg, AllNegativeLabelsPredictBelowHalf) {
  Rng rng(1);
  Matrix x = Matrix::Random(30, 3);
  const auto m = train_logreg(x, std::vector<int>(30, 0), LogRegOptions{});
  EXPECT_LT(m.predict_features(x).maxCoeff(), 0.5);
}

TEST(LogReg, OptimumHasVanishingAnalyticGradient) {
  const auto d = learnable(2, 400);
  const Matrix x = d.joined();
  const auto m = train_logreg(x, d.labels, LogRegOptions{});
  // Penalised negative log-likelihood gradient, computed here from scratch.
  const Vector& w = m.lr_weights();
  Vector gw = w;
  double gb = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double e = sigmoid(x.row(r).dot(w) + m.lr_intercept()) - d.labels[r];
    gw += e * x.row(r).transpose();
    gb += e;
  }
  const double norm = std::sqrt(gw.squaredNorm() + gb * gb);
  EXPECT_LT(norm, 1e-6);
  EXPECT_NEAR(m.lr_gradient_norm(x, d.labels, 1.0), norm, 1e-9);
}

TEST(LogReg, MatchesOneDimensionalRootFinding) {
  // Intercept-only model: the optimum solves sum(sigmoid(b) - y) = 0.
  Matrix x = Matrix::Zero(10, 1);
  std::vector<int> y{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const auto m = train_logreg(x, y, LogRegOptions{});
  EXPECT_NEAR(sigmoid(m.lr_intercept()), 0.3, 1e-7);
}

TEST(NeuralNet, LearnsXor) {
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  NeuralNetOptions o;
  o.hidden = {16, 16};
  o.iterations = 3000;
  o.weight_decay = 0.0;
  o.learning_rate = 0.5;
  const auto m = train_nn(x, {0, 1, 1, 0}, o, 3);
  const Vector p = m.predict_features(x);
  EXPECT_LT(p(0), 0.5);
  EXPECT_GT(p(1), 0.5);
  EXPECT_GT(p(2), 0.5);
  EXPECT_LT(p(3), 0.5);
}

TEST(NeuralNet, SameSeedSameModelAndProbabilitiesInRange) {
  const auto d = learnable(4, 300);
  const auto a = train_nn(d.joined(), d.labels, quick_nn(), 7);
  const auto b = train_nn(d.joined(), d.labels, quick_nn(), 7);
  const auto c = train_nn(d.joined(), d.labels, quick_nn(), 8);
  const Matrix probe = Matrix::Random(50, d.width()) * 100.0;
  EXPECT_EQ(a.predict_features(probe), b.predict_features(probe));
  EXPECT_NE(a.predict_features(probe), c.predict_features(probe));
  const Vector p = a.predict_features(probe);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 1.0);
}

TEST(Regimes, NamesRoundTrip) {
  for (Regime r : {Regime::kBase, Regime::kDis, Regime::kAnti, Regime::kAntiDis, Regime::kAntiDro, Regime::kAntiOnly,
                   Regime::kRandomComparable}) {
    EXPECT_EQ(parse_regime(regime_name(r)), r);
  }
  EXPECT_THROW(parse_regime("bogus"), ConfigError);
  EXPECT_EQ(parse_classifier("logreg"), ClassifierKind::kLogReg);
  EXPECT_THROW(parse_classifier("svm"), ConfigError);
}

TEST(Regimes, EmptyAntidoteReproducesBase) {
  const auto d = learnable(5, 300);
  const auto empty = empty_antidote_set(d);
  for (ClassifierKind kind : {ClassifierKind::kLogReg, ClassifierKind::kNeuralNet}) {
    RegimeConfig cfg;
    cfg.kind = kind;
    cfg.nn = quick_nn();
    const Vector base = train_regime(cfg, d, nullptr, 9).predict(d);
    cfg.regime = Regime::kAnti;
    EXPECT_EQ(train_regime(cfg, d, &empty, 9).predict(d), base);
    if (kind == ClassifierKind::kNeuralNet) {
      cfg.regime = Regime::kAntiDro;
      EXPECT_EQ(train_regime(cfg, d, &empty, 9).predict(d), base);
    }
  }
}

TEST(Regimes, AntiDisEqualsDroppingSensitiveEverywhere) {
  const auto d = learnable(6, 300);
  Rng rng(10);
  const auto extra = random_comparable(d, ComparabilityConfig{1, 0.025}, 100, rng);
  RegimeConfig cfg;
  cfg.regime = Regime::kAntiDis;
  const Vector combined = train_regime(cfg, d, &extra, 1).predict(d);

  AntidoteSet dropped = extra;
  dropped.rows = drop_sensitive(extra.rows);
  const auto base = drop_sensitive(d);
  Matrix x(base.rows() + dropped.rows.rows(), base.width());
  x << base.joined(), dropped.rows.joined();
  std::vector<int> y = base.labels;
  y.insert(y.end(), dropped.rows.labels.begin(), dropped.rows.labels.end());
  const Standardizer st = Standardizer::fit(base.joined());
  const auto manual = train_logreg(st.transform(x), y, LogRegOptions{});
  EXPECT_TRUE(combined.isApprox(manual.predict_features(st.transform(base.joined())), 1e-12));
}

TEST(Regimes, AugmentedSetSizeAndDisDropsSensitive) {
  const auto d = learnable(7, 200);
  Rng rng(11);
  const auto extra = random_comparable(d, ComparabilityConfig{1, 0.025}, 50, rng);
  RegimeConfig cfg;
  cfg.regime = Regime::kDis;
  const auto m = train_regime(cfg, d, nullptr, 1);
  EXPECT_TRUE(m.drops_sensitive());
  EXPECT_EQ(m.lr_weights().size(), d.width() - d.sensitive.cols());
  cfg.regime = Regime::kAnti;
  EXPECT_EQ(train_regime(cfg, d, &extra, 1).lr_weights().size(), d.width());
  cfg.regime = Regime::kAnti;
  EXPECT_THROW(train_regime(cfg, d, nullptr, 1), ConfigError);
  cfg.regime = Regime::kAntiDro;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Regimes, AntiDroTrainsAndDiffersFromAnti) {
  const auto d = learnable(8, 300);
  Rng rng(12);
  const auto extra = random_comparable(d, ComparabilityConfig{1, 0.025}, 150, rng);
  RegimeConfig cfg;
  cfg.kind = ClassifierKind::kNeuralNet;
  cfg.nn = quick_nn();
  cfg.regime = Regime::kAntiDro;
  const Vector dro = train_regime(cfg, d, &extra, 3).predict(d);
  cfg.regime = Regime::kAnti;
  const Vector anti = train_regime(cfg, d, &extra, 3).predict(d);
  EXPECT_TRUE(dro.allFinite());
  EXPECT_NE(dro, anti);
}

TEST(RandomComparable, RowsAreComparableWithChangedSensitive) {
  const auto d = learnable(9, 200);
  const ComparabilityConfig cfg{1, 0.025};
  Rng rng(13);
  const auto set = random_comparable(d, cfg, 1000, rng);
  ASSERT_EQ(set.source.size(), 1000u);
  for (std::size_t k = 0; k < 1000; ++k) {
    const auto a = row_of(set.rows, k);
    const auto b = row_of(d, set.source[k]);
    EXPECT_TRUE(is_comparable(a, b, cfg));
    EXPECT_NE(a.sensitive, b.sensitive);
  }
  EXPECT_NO_THROW(set.rows.check_invariants());
}

TEST(RandomComparable, ZeroThresholdsOnlyMoveSensitive) {
  const auto d = learnable(10, 100);
  Rng rng(14);
  const auto set = random_comparable(d, ComparabilityConfig{0, 0.0}, 200, rng);
  for (std::size_t k = 0; k < 200; ++k) {
    const auto src = static_cast<Eigen::Index>(set.source[k]);
    const auto row = static_cast<Eigen::Index>(k);
    EXPECT_EQ(set.rows.continuous.row(row), d.continuous.row(src));
    EXPECT_EQ(set.rows.discrete.row(row), d.discrete.row(src));
    EXPECT_NE(set.rows.sensitive.row(row), d.sensitive.row(src));
  }
}

TEST(UniformRandomRows, ValidOneHotRows) {
  const auto d = learnable(11, 10);
  Rng rng(15);
  const auto u = uniform_random_rows(d, 500, rng);
  EXPECT_EQ(u.rows(), 500u);
  EXPECT_NO_THROW(u.check_invariants());
}

TEST(ClassifierModel, SaveLoadKeepsPredictions) {
  const auto d = learnable(12, 200);
  for (ClassifierKind kind : {ClassifierKind::kLogReg, ClassifierKind::kNeuralNet}) {
    RegimeConfig cfg;
    cfg.kind = kind;
    cfg.regime = Regime::kDis;
    cfg.nn = quick_nn();
    const auto m = train_regime(cfg, d, nullptr, 2);
    ByteWriter w;
    m.save(w);
    ByteReader r(w.bytes());
    const auto back = ClassifierModel::load(r);
    EXPECT_EQ(back.predict(d), m.predict(d));
    EXPECT_EQ(back.drops_sensitive(), true);
  }
}

}  // namespace
}  // namespace antidote
