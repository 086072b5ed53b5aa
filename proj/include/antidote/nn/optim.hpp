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

#ifndef ANTIDOTE_NN_OPTIM_HPP_
#define ANTIDOTE_NN_OPTIM_HPP_

#include <cmath>
#include <vector>

#include "antidote/nn/tensor.hpp"

namespace antidote::nn {

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamOptions options) : params_(std::move(params)), opt_(options) {
    for (const auto& p : params_) {
      m_.push_back(Mat<T>::Zero(p.rows(), p.cols()));
      v_.push_back(Mat<T>::Zero(p.rows(), p.cols()));
    }
  }

  // Parameters without a gradient are left untouched.
  void step() {
    ++t_;
    const T b1 = static_cast<T>(opt_.beta1);
    const T b2 = static_cast<T>(opt_.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(opt_.beta1, t_));
    const T c2 = static_cast<T>(1.0 - std::pow(opt_.beta2, t_));
    const T lr = static_cast<T>(opt_.learning_rate);
    const T eps = static_cast<T>(opt_.epsilon);
    const T wd = static_cast<T>(opt_.weight_decay);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = params_[k];
      if (!p.has_grad()) continue;
      Mat<T> g = p.grad();
      if (wd != T(0)) g += wd * p.value();
      m_[k] = b1 * m_[k] + (1 - b1) * g;
      v_[k] = b2 * v_[k] + (1 - b2) * g.cwiseAbs2();
      p.mutable_value().array() -=
          lr * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps);
      if (!p.value().allFinite()) throw NumericalError("non-finite parameter after optimiser step");
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  long steps() const { return t_; }

 private:
  std::vector<Tensor<T>> params_;
  AdamOptions opt_;
  std::vector<Mat<T>> m_;
  std::vector<Mat<T>> v_;
  long t_ = 0;
};

struct SgdOptions {
  double learning_rate = 0.1;
  double weight_decay = 0.0;
  long halve_every = 0;  // 0 keeps the rate constant
};

template <typename T>
class Sgd {
 public:
  Sgd(std::vector<Tensor<T>> params, SgdOptions options) : params_(std::move(params)), opt_(options) {}

  double current_rate() const {
    if (opt_.halve_every <= 0) return opt_.learning_rate;
    return opt_.learning_rate * std::pow(0.5, static_cast<double>(t_ / opt_.halve_every));
  }

  void step() {
    const T lr = static_cast<T>(current_rate());
    const T wd = static_cast<T>(opt_.weight_decay);
    for (auto& p : params_) {
      if (!p.has_grad()) continue;
      p.mutable_value() -= lr * (p.grad() + wd * p.value());
      if (!p.value().allFinite()) throw NumericalError("non-finite parameter after optimiser step");
    }
    ++t_;
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

 private:
  std::vector<Tensor<T>> params_;
  SgdOptions opt_;
  long t_ = 0;
};

}  // namespace antidote::nn

#endif  // ANTIDOTE_NN_OPTIM_HPP_
