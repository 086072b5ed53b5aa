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

#ifndef ANTIDOTE_TESTS_GRAD_FIXTURES_HPP_
#define ANTIDOTE_TESTS_GRAD_FIXTURES_HPP_

#include "antidote/gan_nets.hpp"
#include "antidote/nn/grad_check.hpp"
#include "antidote/nn/layers.hpp"
#include "antidote/nn/ops.hpp"

namespace antidote::testing {

using DTensor = nn::Tensor<double>;
using DMat = nn::Mat<double>;

inline DMat random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  return nn::sample_normal<double>(rows, cols, rng);
}

// Small re-representation: two mixture columns, one discrete and two
// sensitive features.
inline ReRepresentation small_rep() {
  ColumnGMM a;
  a.weights = {0.5, 0.5};
  a.means = {0.2, 0.7};
  a.stds = {0.1, 0.1};
  ColumnGMM b;
  b.weights = {1.0};
  b.means = {0.5};
  b.stds = {0.2};
  b.column = 1;
  return ReRepresentation({a, b}, {3}, {2, 3});
}

// Generator in training mode (batch norm active) with soft Gumbel heads and
// fixed noise; loss mixes a random projection and the sensitive CE term.
inline nn::GradCheckResult generator_grad_check(std::uint64_t seed) {
  Rng init(seed);
  const auto rep = small_rep();
  Generator<double> g(rep, 4, 0.5, init, 16);
  g.set_training(true);
  const DMat input = random_matrix(6, g.input_width(), init);
  const DMat proj = random_matrix(6, g.output_width(), init);
  DMat target = DMat::Zero(6, 2);
  for (int r = 0; r < 6; ++r) target(r, r % 2) = 1.0;
  auto loss = [&]() {
    Rng noise(seed + 1);
    auto out = g.forward(DTensor::constant(input), noise, HeadMode::kSoft);
    return nn::add(nn::sum(nn::mul_const(out.rows, proj)),
                   nn::softmax_cross_entropy(out.sensitive_logits[0], target));
  };
  return nn::grad_check(loss, g.parameters());
}

// Critic loss with gradient penalty, dropout masks fixed by reseeding.
inline nn::GradCheckResult discriminator_grad_check(std::uint64_t seed) {
  Rng init(seed);
  Discriminator<double> d(5, init, 12, 0.5);
  d.set_training(true);
  const DMat real = random_matrix(8, 15, init);
  const DMat fake = random_matrix(8, 15, init);
  const DMat interp = 0.3 * real + 0.7 * fake;
  auto loss = [&]() {
    Rng masks(seed + 2);
    const DTensor dr = d.forward(DTensor::constant(real), &masks);
    const DTensor df = d.forward(DTensor::constant(fake), &masks);
    const DTensor grad = d.net().input_gradient(interp, &masks);
    const DTensor gp = nn::mean(nn::square(nn::add_scalar(nn::row_norm(grad), -1.0)));
    return nn::add(nn::sub(nn::mean(df), nn::mean(dr)), nn::scale(gp, 10.0));
  };
  return nn::grad_check(loss, d.parameters());
}

// Two hidden ReLU layers with a weighted logistic loss.
inline nn::GradCheckResult classifier_grad_check(std::uint64_t seed) {
  Rng init(seed);
  nn::NetSpec spec{10, {nn::LayerSpec::linear(100), nn::LayerSpec::relu(), nn::LayerSpec::linear(100),
                        nn::LayerSpec::relu(), nn::LayerSpec::linear(1)}};
  nn::Sequential<double> net(spec, init);
  const DMat x = random_matrix(16, 10, init);
  DMat y(16, 1), w(16, 1);
  for (int r = 0; r < 16; ++r) {
    y(r, 0) = r % 3 == 0;
    w(r, 0) = 1.0 / 16 + 0.01 * r;
  }
  auto loss = [&]() { return nn::weighted_bce_with_logits(net.forward(DTensor::constant(x), nullptr), y, w); };
  // Gradient entries below 1e-5 are compared on an absolute scale: the
  // central difference carries about 1e-10 of rounding noise at this depth.
  return nn::grad_check(loss, net.parameters(), 1e-6, 1e-5);
}

}  // namespace antidote::testing

#endif  // ANTIDOTE_TESTS_GRAD_FIXTURES_HPP_
