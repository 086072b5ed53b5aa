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

#ifndef ANTIDOTE_NN_LAYERS_HPP_
#define ANTIDOTE_NN_LAYERS_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "antidote/binary_io.hpp"
#include "antidote/nn/ops.hpp"

namespace antidote::nn {

// Batch normalisation over rows with learned affine parameters. In training
// mode the batch statistics are used and the running statistics are updated
// (retaining `1 - momentum` of the previous value); in evaluation mode the
// running statistics are used.
template <typename T>
Tensor<T> batch_norm_train(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps,
                           Mat<T>* batch_mean, Mat<T>* batch_var) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw ContractViolation("batch norm in training mode needs at least two rows");
  const Mat<T> mu = x.value().colwise().mean();
  const Mat<T> centered = x.value().rowwise() - mu.row(0);
  const Mat<T> var = centered.array().square().colwise().mean();
  const Mat<T> inv_std = (var.array() + eps).rsqrt();
  Mat<T> xhat = centered.array().rowwise() * inv_std.row(0).array();
  Mat<T> out = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() +
               beta.value().row(0).array();
  if (batch_mean) *batch_mean = mu;
  if (batch_var) *batch_var = var;
  return Tensor<T>::make(std::move(out), {x, gamma, beta},
                         [xhat = std::move(xhat), inv_std](Node<T>& node) {
                           auto& xin = parent(node, 0);
                           auto& g = parent(node, 1);
                           auto& b = parent(node, 2);
                           const Mat<T>& dy = node.grad;
                           if (g.requires_grad) g.accumulate(dy.cwiseProduct(xhat).colwise().sum());
                           if (b.requires_grad) b.accumulate(dy.colwise().sum());
                           if (!xin.requires_grad) return;
                           const Mat<T> dxhat = dy.array().rowwise() * g.value.row(0).array();
                           const Mat<T> mean_d = dxhat.colwise().mean();
                           const Mat<T> mean_dx = dxhat.cwiseProduct(xhat).colwise().mean();
                           Mat<T> dx = ((dxhat.rowwise() - mean_d.row(0)).array() -
                                        xhat.array().rowwise() * mean_dx.row(0).array())
                                           .rowwise() *
                                       inv_std.row(0).array();
                           xin.accumulate(dx);
                         },
                         "batch_norm");
}

template <typename T>
Tensor<T> batch_norm_eval(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, const Mat<T>& mean,
                          const Mat<T>& var, T eps) {
  const Mat<T> inv_std = (var.array() + eps).rsqrt();
  const Mat<T> s = inv_std.cwiseProduct(gamma.value());
  Mat<T> out = ((x.value().rowwise() - mean.row(0)).array().rowwise() * s.row(0).array()).rowwise() +
               beta.value().row(0).array();
  Mat<T> xhat = (x.value().rowwise() - mean.row(0)).array().rowwise() * inv_std.row(0).array();
  return Tensor<T>::make(std::move(out), {x, gamma, beta}, [s, xhat = std::move(xhat)](Node<T>& node) {
    auto& xin = parent(node, 0);
    auto& g = parent(node, 1);
    auto& b = parent(node, 2);
    if (xin.requires_grad) xin.accumulate(Mat<T>(node.grad.array().rowwise() * s.row(0).array()));
    if (g.requires_grad) g.accumulate(node.grad.cwiseProduct(xhat).colwise().sum());
    if (b.requires_grad) b.accumulate(node.grad.colwise().sum());
  }, "batch_norm_eval");
}

enum class LayerKind : std::uint8_t {
  kLinear,
  kBatchNorm,
  kReLU,
  kLeakyReLU,
  kTanh,
  kSigmoid,
  kDropout,
  kMark,          // remembers the current activation
  kConcatMarked,  // appends the remembered activation to the current one
};

struct LayerSpec {
  LayerKind kind;
  int units = 0;       // kLinear
  double param = 0.0;  // leaky slope or dropout probability

  static LayerSpec linear(int units) { return {LayerKind::kLinear, units, 0.0}; }
  static LayerSpec batch_norm() { return {LayerKind::kBatchNorm}; }
  static LayerSpec relu() { return {LayerKind::kReLU}; }
  static LayerSpec leaky_relu(double slope) { return {LayerKind::kLeakyReLU, 0, slope}; }
  static LayerSpec tanh() { return {LayerKind::kTanh}; }
  static LayerSpec sigmoid() { return {LayerKind::kSigmoid}; }
  static LayerSpec dropout(double p) { return {LayerKind::kDropout, 0, p}; }
  static LayerSpec mark() { return {LayerKind::kMark}; }
  static LayerSpec concat_marked() { return {LayerKind::kConcatMarked}; }

  bool operator==(const LayerSpec&) const = default;
};

struct NetSpec {
  int input_width = 0;
  std::vector<LayerSpec> layers;

  // Width of the final activation; throws on an inconsistent spec.
  int output_width() const {
    if (input_width <= 0) throw ConfigError("network input width must be positive");
    int width = input_width;
    std::optional<int> marked;
    for (const auto& l : layers) {
      switch (l.kind) {
        case LayerKind::kLinear:
          if (l.units <= 0) throw ConfigError("linear layer needs a positive unit count");
          width = l.units;
          break;
        case LayerKind::kDropout:
          if (!(l.param >= 0.0 && l.param < 1.0)) throw ConfigError("dropout probability must be in [0, 1)");
          break;
        case LayerKind::kLeakyReLU:
          if (!(l.param >= 0.0)) throw ConfigError("leaky slope must be non-negative");
          break;
        case LayerKind::kMark:
          marked = width;
          break;
        case LayerKind::kConcatMarked:
          if (!marked) throw ConfigError("concat without a marked activation");
          width += *marked;
          marked.reset();
          break;
        default:
          break;
      }
    }
    return width;
  }

  bool operator==(const NetSpec&) const = default;
};

// A feed-forward network built from a NetSpec. Linear layers compute
// x W + b with W of shape (in, out), initialised U(-1/sqrt(in), 1/sqrt(in)).
template <typename T>
class Sequential {
 public:
  Sequential() = default;

  Sequential(NetSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.output_width();
    int width = spec_.input_width;
    std::optional<int> marked;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const auto& l = spec_.layers[i];
      Slot slot;
      if (l.kind == LayerKind::kLinear) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(width));
        std::uniform_real_distribution<double> u(-bound, bound);
        Mat<T> w(width, l.units);
        Mat<T> b(1, l.units);
        for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = static_cast<T>(u(rng));
        for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = static_cast<T>(u(rng));
        slot.a = Tensor<T>::parameter(std::move(w));
        slot.b = Tensor<T>::parameter(std::move(b));
        register_param("layer" + std::to_string(i) + ".weight", slot.a);
        register_param("layer" + std::to_string(i) + ".bias", slot.b);
        width = l.units;
      } else if (l.kind == LayerKind::kBatchNorm) {
        slot.a = Tensor<T>::parameter(Mat<T>::Ones(1, width));
        slot.b = Tensor<T>::parameter(Mat<T>::Zero(1, width));
        slot.running_mean = Mat<T>::Zero(1, width);
        slot.running_var = Mat<T>::Ones(1, width);
        register_param("layer" + std::to_string(i) + ".gamma", slot.a);
        register_param("layer" + std::to_string(i) + ".beta", slot.b);
      } else if (l.kind == LayerKind::kMark) {
        marked = width;
      } else if (l.kind == LayerKind::kConcatMarked) {
        width += *marked;
      }
      slots_.push_back(std::move(slot));
    }
  }

  const NetSpec& spec() const { return spec_; }
  int output_width() const { return spec_.output_width(); }
  const std::vector<std::string>& parameter_names() const { return names_; }
  std::vector<Tensor<T>>& parameters() { return params_; }
  const std::vector<Tensor<T>>& parameters() const { return params_; }

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }

  // Forward pass. `rng` supplies dropout masks in training mode.
  Tensor<T> forward(const Tensor<T>& input, Rng* rng) {
    if (input.cols() != spec_.input_width) throw ContractViolation("network input width mismatch");
    Tensor<T> x = input;
    Tensor<T> marked;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const auto& l = spec_.layers[i];
      Slot& s = slots_[i];
      switch (l.kind) {
        case LayerKind::kLinear:
          x = add_row(matmul(x, s.a), s.b);
          break;
        case LayerKind::kBatchNorm:
          if (training_) {
            Mat<T> m, v;
            x = batch_norm_train(x, s.a, s.b, kEps, &m, &v);
            const T n = static_cast<T>(input.rows());
            s.running_mean = (1 - kMomentum) * s.running_mean + kMomentum * m;
            s.running_var = (1 - kMomentum) * s.running_var + kMomentum * (v * (n / (n - 1)));
          } else {
            x = batch_norm_eval(x, s.a, s.b, s.running_mean, s.running_var, kEps);
          }
          break;
        case LayerKind::kReLU:
          x = relu(x);
          break;
        case LayerKind::kLeakyReLU:
          x = leaky_relu(x, static_cast<T>(l.param));
          break;
        case LayerKind::kTanh:
          x = nn::tanh(x);
          break;
        case LayerKind::kSigmoid:
          x = sigmoid(x);
          break;
        case LayerKind::kDropout:
          if (training_ && l.param > 0.0) {
            if (!rng) throw ContractViolation("dropout in training mode needs a random source");
            x = mul_const(x, dropout_mask(x.rows(), x.cols(), l.param, *rng));
          }
          break;
        case LayerKind::kMark:
          marked = x;
          break;
        case LayerKind::kConcatMarked:
          x = concat_cols<T>({x, marked});
          break;
      }
    }
    return x;
  }

  // Returns d(sum of outputs)/d(input) as a tape expression of the parameters,
  // so a penalty on it can be differentiated again. The network must have a
  // single output column and no batch normalisation or skip connections.
  Tensor<T> input_gradient(const Mat<T>& input, Rng* rng) {
    if (output_width() != 1) throw ContractViolation("input_gradient needs a scalar-output network");
    struct Step {
      LayerKind kind;
      std::size_t slot;
      Mat<T> mask;
      Tensor<T> activation;
    };
    std::vector<Step> steps;
    Tensor<T> x = Tensor<T>::constant(input);
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const auto& l = spec_.layers[i];
      Slot& s = slots_[i];
      switch (l.kind) {
        case LayerKind::kLinear:
          steps.push_back({l.kind, i, {}, {}});
          x = add_row(matmul(x, s.a), s.b);
          break;
        case LayerKind::kReLU:
          steps.push_back({l.kind, i, (x.value().array() > T(0)).template cast<T>().matrix(), {}});
          x = relu(x);
          break;
        case LayerKind::kLeakyReLU: {
          const T slope = static_cast<T>(l.param);
          Mat<T> mask = (x.value().array() > T(0)).select(Mat<T>::Ones(x.rows(), x.cols()), slope);
          steps.push_back({l.kind, i, std::move(mask), {}});
          x = leaky_relu(x, slope);
          break;
        }
        case LayerKind::kTanh:
          x = nn::tanh(x);
          steps.push_back({l.kind, i, {}, x});
          break;
        case LayerKind::kSigmoid:
          x = sigmoid(x);
          steps.push_back({l.kind, i, {}, x});
          break;
        case LayerKind::kDropout:
          if (training_ && l.param > 0.0) {
            if (!rng) throw ContractViolation("dropout in training mode needs a random source");
            Mat<T> mask = dropout_mask(x.rows(), x.cols(), l.param, *rng);
            x = mul_const(x, mask);
            steps.push_back({l.kind, i, std::move(mask), {}});
          }
          break;
        default:
          throw ContractViolation("input_gradient does not support batch norm or skip connections");
      }
    }
    Tensor<T> g = Tensor<T>::constant(Mat<T>::Ones(input.rows(), 1));
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      switch (it->kind) {
        case LayerKind::kLinear:
          g = matmul(g, transpose(slots_[it->slot].a));
          break;
        case LayerKind::kTanh:
          g = mul(g, add_scalar(scale(square(it->activation), T(-1)), T(1)));
          break;
        case LayerKind::kSigmoid:
          g = mul(g, mul(it->activation, add_scalar(scale(it->activation, T(-1)), T(1))));
          break;
        default:
          g = mul_const(g, it->mask);
          break;
      }
    }
    return g;
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  // Parameter values and running statistics, in double precision.
  void save(ByteWriter& w) const {
    w.put<std::uint64_t>(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const auto& l = spec_.layers[i];
      const auto& s = slots_[i];
      if (l.kind == LayerKind::kLinear || l.kind == LayerKind::kBatchNorm) {
        w.put_matrix(s.a.value());
        w.put_matrix(s.b.value());
      }
      if (l.kind == LayerKind::kBatchNorm) {
        w.put_matrix(s.running_mean);
        w.put_matrix(s.running_var);
      }
    }
  }

  void load(ByteReader& r) {
    if (r.get<std::uint64_t>() != slots_.size()) throw ConfigError("network layer count mismatch");
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const auto& l = spec_.layers[i];
      auto& s = slots_[i];
      if (l.kind == LayerKind::kLinear || l.kind == LayerKind::kBatchNorm) {
        assign(s.a.mutable_value(), r.get_matrix());
        assign(s.b.mutable_value(), r.get_matrix());
      }
      if (l.kind == LayerKind::kBatchNorm) {
        assign(s.running_mean, r.get_matrix());
        assign(s.running_var, r.get_matrix());
      }
    }
  }

  // Copies parameters and running statistics from a network of the same spec.
  template <typename U>
  void copy_from(const Sequential<U>& other) {
    if (!(other.spec() == spec_)) throw ContractViolation("copy_from: spec mismatch");
    ByteWriter w;
    other.save(w);
    ByteReader r(w.bytes());
    load(r);
  }

 private:
  static constexpr T kEps = T(1e-5);
  static constexpr T kMomentum = T(0.1);

  struct Slot {
    Tensor<T> a;  // weight or gamma
    Tensor<T> b;  // bias or beta
    Mat<T> running_mean;
    Mat<T> running_var;
  };

  static void assign(Mat<T>& dst, const Matrix& src) {
    if (dst.rows() != src.rows() || dst.cols() != src.cols()) throw ConfigError("network parameter shape mismatch");
    dst = src.cast<T>();
  }

  static Mat<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
    std::bernoulli_distribution keep(1.0 - p);
    const T s = static_cast<T>(1.0 / (1.0 - p));
    Mat<T> m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = keep(rng) ? s : T(0);
    return m;
  }

  void register_param(std::string name, const Tensor<T>& t) {
    names_.push_back(std::move(name));
    params_.push_back(t);
  }

  NetSpec spec_;
  std::vector<Slot> slots_;
  std::vector<std::string> names_;
  std::vector<Tensor<T>> params_;
  bool training_ = true;
};

}  // namespace antidote::nn

#endif  // ANTIDOTE_NN_LAYERS_HPP_
