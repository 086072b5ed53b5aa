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

#ifndef ANTIDOTE_GAN_NETS_HPP_
#define ANTIDOTE_GAN_NETS_HPP_

#include <string>
#include <vector>

#include "antidote/gmm.hpp"
#include "antidote/nn/layers.hpp"

namespace antidote {

enum class HeadMode : std::uint8_t {
  kHard,  // straight-through one-hot samples
  kSoft,  // relaxed samples (used for gradient checks)
};

template <typename T>
struct GeneratorOutput {
  nn::Tensor<T> rows;                               // same layout as the re-representation
  std::vector<nn::Tensor<T>> sensitive_logits;      // one per sensitive feature
};

// Conditional generator: input x~ | s' | z, two residual blocks of
// [linear 256, batch norm, relu] whose input is concatenated to the output,
// a trunk layer of the output width, then one linear head per slice: tanh for
// relative values and Gumbel softmax for every one-hot slice.
template <typename T>
class Generator {
 public:
  Generator() = default;

  Generator(const ReRepresentation& rep, int noise_dim, double temperature, Rng& rng,
            int hidden = 256)
      : slices_(rep.slices()),
        width_(rep.width()),
        sensitive_width_(rep.sensitive_width()),
        noise_dim_(noise_dim),
        temperature_(temperature) {
    if (noise_dim < 0) throw ConfigError("noise dimension must be non-negative");
    if (!(temperature > 0)) throw ConfigError("Gumbel temperature must be positive");
    nn::NetSpec spec;
    spec.input_width = input_width();
    using L = nn::LayerSpec;
    for (int b = 0; b < 2; ++b) {
      for (auto l : {L::mark(), L::linear(hidden), L::batch_norm(), L::relu(), L::concat_marked()})
        spec.layers.push_back(l);
    }
    for (auto l : {L::linear(width_), L::batch_norm(), L::relu()}) spec.layers.push_back(l);
    trunk_ = nn::Sequential<T>(spec, rng);
    for (const auto& s : slices_) {
      heads_.emplace_back(nn::NetSpec{s.width, {L::linear(s.width)}}, rng);
    }
  }

  int input_width() const { return width_ + sensitive_width_ + noise_dim_; }
  int output_width() const { return width_; }
  int noise_dim() const { return noise_dim_; }
  double temperature() const { return temperature_; }
  const std::vector<Slice>& slices() const { return slices_; }

  void set_training(bool training) {
    trunk_.set_training(training);
    for (auto& h : heads_) h.set_training(training);
  }

  std::vector<nn::Tensor<T>> parameters() const {
    std::vector<nn::Tensor<T>> out = trunk_.parameters();
    for (const auto& h : heads_)
      for (const auto& p : h.parameters()) out.push_back(p);
    return out;
  }

  // `rng` drives the Gumbel noise of every one-hot head.
  GeneratorOutput<T> forward(const nn::Tensor<T>& input, Rng& rng, HeadMode mode = HeadMode::kHard) {
    const nn::Tensor<T> h = trunk_.forward(input, nullptr);
    std::vector<nn::Tensor<T>> parts;
    GeneratorOutput<T> out;
    for (std::size_t k = 0; k < slices_.size(); ++k) {
      const Slice& s = slices_[k];
      const nn::Tensor<T> logits = heads_[k].forward(nn::slice_cols(h, s.offset, s.width), nullptr);
      if (s.kind == SliceKind::kValue) {
        parts.push_back(nn::tanh(logits));
        continue;
      }
      const nn::Mat<T> g = nn::sample_gumbel<T>(logits.rows(), logits.cols(), rng);
      parts.push_back(nn::gumbel_softmax(logits, g, static_cast<T>(temperature_), mode == HeadMode::kHard));
      if (s.kind == SliceKind::kSensitive) out.sensitive_logits.push_back(logits);
    }
    out.rows = nn::concat_cols(parts);
    return out;
  }

  void save(ByteWriter& w) const {
    trunk_.save(w);
    for (const auto& h : heads_) h.save(w);
  }
  void load(ByteReader& r) {
    trunk_.load(r);
    for (auto& h : heads_) h.load(r);
  }

  template <typename U>
  void copy_from(const Generator<U>& other) {
    ByteWriter w;
    other.save(w);
    ByteReader r(w.bytes());
    load(r);
  }

 private:
  std::vector<Slice> slices_;
  int width_ = 0;
  int sensitive_width_ = 0;
  int noise_dim_ = 0;
  double temperature_ = 0.2;
  nn::Sequential<T> trunk_;
  std::vector<nn::Sequential<T>> heads_;
};

// Critic over x^ | x~ | (x^ - x~): two blocks of [linear 256, leaky relu 0.2,
// dropout 0.5] and a scalar output.
template <typename T>
class Discriminator {
 public:
  Discriminator() = default;

  Discriminator(int row_width, Rng& rng, int hidden = 256, double dropout = 0.5) {
    using L = nn::LayerSpec;
    nn::NetSpec spec;
    spec.input_width = 3 * row_width;
    for (int b = 0; b < 2; ++b) {
      for (auto l : {L::linear(hidden), L::leaky_relu(0.2), L::dropout(dropout)}) spec.layers.push_back(l);
    }
    spec.layers.push_back(L::linear(1));
    net_ = nn::Sequential<T>(spec, rng);
  }

  int input_width() const { return net_.spec().input_width; }
  void set_training(bool training) { net_.set_training(training); }
  std::vector<nn::Tensor<T>> parameters() const { return net_.parameters(); }
  nn::Sequential<T>& net() { return net_; }

  nn::Tensor<T> forward(const nn::Tensor<T>& input, Rng* rng) { return net_.forward(input, rng); }

  void save(ByteWriter& w) const { net_.save(w); }
  void load(ByteReader& r) { net_.load(r); }

  template <typename U>
  void copy_from(const Discriminator<U>& other) {
    ByteWriter w;
    other.save(w);
    ByteReader r(w.bytes());
    load(r);
  }

 private:
  nn::Sequential<T> net_;
};

// x^ | x~ | (x^ - x~) for a candidate x^ and its source x~.
template <typename T>
nn::Tensor<T> critic_input(const nn::Tensor<T>& candidate, const nn::Tensor<T>& source) {
  return nn::concat_cols<T>({candidate, source, nn::sub(candidate, source)});
}

}  // namespace antidote

#endif  // ANTIDOTE_GAN_NETS_HPP_
