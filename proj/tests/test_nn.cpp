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

#include "antidote/nn/optim.hpp"
#include "grad_fixtures.hpp"

namespace antidote::nn {
namespace {

using testing::DMat;
using testing::DTensor;
using testing::random_matrix;

TEST(Forward, IdentityLinearLayerPassesInputThrough) {
  Rng rng(1);
  Sequential<double> net(NetSpec{3, {LayerSpec::linear(3)}}, rng);
  net.parameters()[0].mutable_value() = DMat::Identity(3, 3);
  net.parameters()[1].mutable_value().setZero();
  const DMat x = random_matrix(4, 3, rng);
  EXPECT_EQ(net.forward(DTensor::constant(x), nullptr).value(), x);
}

TEST(Forward, ReluAndZeroDropout) {
  DMat x(1, 2);
  x << -1, 2;
  EXPECT_EQ(relu(DTensor::constant(x)).value(), (DMat(1, 2) << 0, 2).finished());
  Rng rng(2);
  Sequential<double> net(NetSpec{2, {LayerSpec::dropout(0.0)}}, rng);
  net.set_training(true);
  EXPECT_EQ(net.forward(DTensor::constant(x), &rng).value(), x);
}

TEST(Forward, DropoutKeepsExpectation) {
  Rng rng(3);
  Sequential<double> net(NetSpec{1, {LayerSpec::dropout(0.5)}}, rng);
  net.set_training(true);
  const DMat x = DMat::Ones(20000, 1);
  const DMat y = net.forward(DTensor::constant(x), &rng).value();
  EXPECT_NEAR(y.mean(), 1.0, 0.03);
  net.set_training(false);
  EXPECT_EQ(net.forward(DTensor::constant(x), nullptr).value(), x);
}

TEST(Gumbel, LargeMarginAlmostAlwaysPicksTheLeader) {
  Rng rng(4);
  DMat logits(1, 2);
  logits << 50, -50;
  int wins = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto out = gumbel_softmax(DTensor::constant(logits), sample_gumbel<double>(1, 2, rng), 0.2, true);
    wins += out.value()(0, 0) == 1.0;
  }
  EXPECT_GT(wins / 10000.0, 0.999);
}

TEST(Gumbel, HardSamplesAreOneHotAndFollowSoftmax) {
  Rng rng(5);
  DMat logits(1, 4);
  logits << 0.5, -0.3, 1.2, 0.0;
  const DMat p = softmax_rows(logits);
  std::vector<double> hist(4, 0.0);
  const int draws = 100000;
  const DMat big = logits.replicate(draws, 1);
  const DMat out = gumbel_softmax(DTensor::constant(big), sample_gumbel<double>(draws, 4, rng), 0.01, true).value();
  for (int r = 0; r < draws; ++r) {
    ASSERT_DOUBLE_EQ(out.row(r).sum(), 1.0);
    ASSERT_EQ((out.row(r).array() == 0.0).count(), 3);
    for (int k = 0; k < 4; ++k) hist[k] += out(r, k) / draws;
  }
  double tv = 0;
  for (int k = 0; k < 4; ++k) tv += 0.5 * std::abs(hist[k] - p(0, k));
  EXPECT_LT(tv, 0.02);
}

TEST(Gumbel, StraightThroughGradientMatchesSoftSample) {
  Rng rng(6);
  const DMat logits = random_matrix(3, 4, rng);
  const DMat noise = sample_gumbel<double>(3, 4, rng);
  const DMat proj = random_matrix(3, 4, rng);
  auto hard = DTensor::parameter(logits);
  sum(mul_const(gumbel_softmax(hard, noise, 0.5, true), proj)).backward();
  auto soft = DTensor::parameter(logits);
  sum(mul_const(gumbel_softmax(soft, noise, 0.5, false), proj)).backward();
  EXPECT_TRUE(hard.grad().isApprox(soft.grad(), 1e-12));
}

TEST(GradCheck, LinearTanhNetwork) {
  Rng rng(7);
  Sequential<double> net(NetSpec{5, {LayerSpec::linear(7), LayerSpec::tanh(), LayerSpec::linear(3),
                                     LayerSpec::sigmoid()}},
                         rng);
  const DMat x = random_matrix(6, 5, rng);
  const DMat proj = random_matrix(6, 3, rng);
  const auto r = grad_check([&] { return sum(mul_const(net.forward(DTensor::constant(x), nullptr), proj)); },
                            net.parameters(), 1e-5);
  EXPECT_GT(r.checked, 0);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(GradCheck, BatchNormNetwork) {
  Rng rng(8);
  Sequential<double> net(NetSpec{4, {LayerSpec::linear(6), LayerSpec::batch_norm(), LayerSpec::relu(),
                                     LayerSpec::linear(2)}},
                         rng);
  net.set_training(true);
  const DMat x = random_matrix(10, 4, rng);
  const DMat proj = random_matrix(10, 2, rng);
  const auto r = grad_check([&] { return sum(square(mul_const(net.forward(DTensor::constant(x), nullptr), proj))); },
                            net.parameters());
  EXPECT_LT(r.max_relative_error, 1e-3);
}

TEST(GradCheck, ZeroLossGivesZeroGradients) {
  Rng rng(9);
  Sequential<double> net(NetSpec{3, {LayerSpec::linear(2)}}, rng);
  const DMat x = random_matrix(4, 3, rng);
  for (auto& p : net.parameters()) p.zero_grad();
  scale(sum(net.forward(DTensor::constant(x), nullptr)), 0.0).backward();
  for (auto& p : net.parameters()) {
    if (p.has_grad()) {
      EXPECT_EQ(p.grad().cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(GradCheck, OpsWithCrossEntropyAndRowNorm) {
  Rng rng(10);
  auto a = DTensor::parameter(random_matrix(4, 3, rng));
  auto b = DTensor::parameter(random_matrix(3, 5, rng));
  DMat target = DMat::Zero(4, 5);
  for (int r = 0; r < 4; ++r) target(r, (r * 2) % 5) = 1.0;
  auto loss = [&] {
    const auto h = matmul(a, b);
    return add(softmax_cross_entropy(h, target), mean(row_norm(slice_cols(h, 1, 3))));
  };
  EXPECT_LT(grad_check(loss, {a, b}).max_relative_error, 1e-6);
}

TEST(GradCheck, ArchitecturesOfTheSystem) {
  EXPECT_LT(testing::generator_grad_check(11).max_relative_error, 1e-3);
  EXPECT_LT(testing::discriminator_grad_check(12).max_relative_error, 1e-4);
  EXPECT_LT(testing::classifier_grad_check(13).max_relative_error, 1e-4);
}

TEST(InputGradient, MatchesFiniteDifferencesOfTheForwardPass) {
  Rng rng(14);
  Sequential<double> net(NetSpec{4, {LayerSpec::linear(6), LayerSpec::leaky_relu(0.2), LayerSpec::linear(5),
                                     LayerSpec::tanh(), LayerSpec::linear(1)}},
                         rng);
  DMat x = random_matrix(3, 4, rng);
  const DMat g = net.input_gradient(x, nullptr).value();
  const double h = 1e-6;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      DMat xp = x, xm = x;
      xp(r, c) += h;
      xm(r, c) -= h;
      const double fd = (net.forward(DTensor::constant(xp), nullptr).value().sum() -
                         net.forward(DTensor::constant(xm), nullptr).value().sum()) /
                        (2 * h);
      EXPECT_NEAR(g(r, c), fd, 1e-6);
    }
  }
}

TEST(Optim, ZeroGradientLeavesParametersUnchanged) {
  auto p = DTensor::parameter(DMat::Constant(2, 2, 1.5));
  p.zero_grad();
  sum(scale(p, 0.0)).backward();
  Adam<double> adam({p}, AdamOptions{});
  adam.step();
  EXPECT_EQ(p.value(), DMat::Constant(2, 2, 1.5));
  Sgd<double> sgd({p}, SgdOptions{});
  sgd.step();
  EXPECT_EQ(p.value(), DMat::Constant(2, 2, 1.5));
}

TEST(Optim, SgdHalvesEvery2500Steps) {
  auto p = DTensor::parameter(DMat::Zero(1, 1));
  Sgd<double> sgd({p}, SgdOptions{0.1, 0.0, 2500});
  EXPECT_DOUBLE_EQ(sgd.current_rate(), 0.1);
  for (int i = 0; i < 2500; ++i) sgd.step();
  EXPECT_DOUBLE_EQ(sgd.current_rate(), 0.05);
  for (int i = 0; i < 2500; ++i) sgd.step();
  EXPECT_DOUBLE_EQ(sgd.current_rate(), 0.025);
}

TEST(Optim, AdamFindsQuadraticMinimiser) {
  auto x = DTensor::parameter(DMat::Zero(1, 1));
  AdamOptions o;
  o.learning_rate = 0.1;
  Adam<double> adam({x}, o);
  for (int i = 0; i < 500; ++i) {
    x.zero_grad();
    square(add_scalar(x, -3.0)).backward();
    adam.step();
  }
  EXPECT_NEAR(x.value()(0, 0), 3.0, 1e-3);
}

TEST(Optim, AdamFirstStepMovesByLearningRate) {
  auto x = DTensor::parameter(DMat::Constant(1, 1, 1.0));
  AdamOptions o;
  o.learning_rate = 0.01;
  Adam<double> adam({x}, o);
  x.zero_grad();
  scale(x, 4.0).backward();
  adam.step();
  EXPECT_NEAR(x.value()(0, 0), 1.0 - 0.01, 1e-9);
}

TEST(Serialization, SequentialSaveLoadRoundTrip) {
  Rng rng(15);
  Sequential<double> a(NetSpec{3, {LayerSpec::linear(4), LayerSpec::batch_norm(), LayerSpec::relu(),
                                   LayerSpec::linear(1)}},
                       rng);
  a.set_training(true);
  a.forward(DTensor::constant(random_matrix(8, 3, rng)), nullptr);
  ByteWriter w;
  a.save(w);
  Rng other(99);
  Sequential<double> b(a.spec(), other);
  ByteReader r(w.bytes());
  b.load(r);
  a.set_training(false);
  b.set_training(false);
  const DMat x = random_matrix(5, 3, rng);
  EXPECT_EQ(a.forward(DTensor::constant(x), nullptr).value(), b.forward(DTensor::constant(x), nullptr).value());
}

}  // namespace
}  // namespace antidote::nn
