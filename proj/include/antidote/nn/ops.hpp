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

#ifndef ANTIDOTE_NN_OPS_HPP_
#define ANTIDOTE_NN_OPS_HPP_

#include <cmath>
#include <vector>

#include "antidote/nn/tensor.hpp"

namespace antidote::nn {

namespace detail {
template <typename T>
inline void push(Node<T>& p, const Mat<T>& g) {
  if (p.requires_grad) p.accumulate(g);
}
}  // namespace detail

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.cols() != b.rows()) throw ContractViolation("matmul: inner dimensions differ");
  Mat<T> v = a.value() * b.value();
  return Tensor<T>::make(std::move(v), {a, b}, [](Node<T>& n) {
    auto& x = parent(n, 0);
    auto& y = parent(n, 1);
    if (x.requires_grad) x.accumulate(n.grad * y.value.transpose());
    if (y.requires_grad) y.accumulate(x.value.transpose() * n.grad);
  }, "matmul");
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  Mat<T> v = a.value().transpose();
  return Tensor<T>::make(std::move(v), {a}, [](Node<T>& n) {
    detail::push(parent(n, 0), Mat<T>(n.grad.transpose()));
  }, "transpose");
}

// a + bias, bias broadcast over rows (1 x cols).
template <typename T>
Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw ContractViolation("add_row: shape");
  Mat<T> v = a.value().rowwise() + bias.value().row(0);
  return Tensor<T>::make(std::move(v), {a, bias}, [](Node<T>& n) {
    detail::push(parent(n, 0), n.grad);
    if (parent(n, 1).requires_grad) parent(n, 1).accumulate(n.grad.colwise().sum());
  }, "add_row");
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("add: shape");
  Mat<T> v = a.value() + b.value();
  return Tensor<T>::make(std::move(v), {a, b}, [](Node<T>& n) {
    detail::push(parent(n, 0), n.grad);
    detail::push(parent(n, 1), n.grad);
  }, "add");
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("sub: shape");
  Mat<T> v = a.value() - b.value();
  return Tensor<T>::make(std::move(v), {a, b}, [](Node<T>& n) {
    detail::push(parent(n, 0), n.grad);
    detail::push(parent(n, 1), Mat<T>(-n.grad));
  }, "sub");
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("mul: shape");
  Mat<T> v = a.value().cwiseProduct(b.value());
  return Tensor<T>::make(std::move(v), {a, b}, [](Node<T>& n) {
    auto& x = parent(n, 0);
    auto& y = parent(n, 1);
    if (x.requires_grad) x.accumulate(n.grad.cwiseProduct(y.value));
    if (y.requires_grad) y.accumulate(n.grad.cwiseProduct(x.value));
  }, "mul");
}

// Elementwise product with a constant mask.
template <typename T>
Tensor<T> mul_const(const Tensor<T>& a, Mat<T> mask) {
  if (a.rows() != mask.rows() || a.cols() != mask.cols()) throw ContractViolation("mul_const: shape");
  Mat<T> v = a.value().cwiseProduct(mask);
  return Tensor<T>::make(std::move(v), {a}, [mask = std::move(mask)](Node<T>& n) {
    detail::push(parent(n, 0), Mat<T>(n.grad.cwiseProduct(mask)));
  }, "mul_const");
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  Mat<T> v = a.value() * s;
  return Tensor<T>::make(std::move(v), {a}, [s](Node<T>& n) {
    detail::push(parent(n, 0), Mat<T>(n.grad * s));
  }, "scale");
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  Mat<T> v = a.value().array() + s;
  return Tensor<T>::make(std::move(v), {a}, [](Node<T>& n) {
    detail::push(parent(n, 0), n.grad);
  }, "add_scalar");
}

template <typename T>
Tensor<T> square(const Tensor<T>& a) {
  Mat<T> v = a.value().array().square();
  return Tensor<T>::make(std::move(v), {a}, [](Node<T>& n) {
    auto& x = parent(n, 0);
    if (x.requires_grad) x.accumulate(Mat<T>(2 * n.grad.cwiseProduct(x.value)));
  }, "square");
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  Mat<T> v = a.value().cwiseMax(T(0));
  return Tensor<T>::make(std::move(v), {a}, [](Node<T>& n) {
    auto& x = parent(n, 0);
    if (x.requires_grad) x.accumulate(Mat<T>((x.value.array() > T(0)).select(n.grad, T(0))));
  }, "relu");
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope) {
  Mat<T> v = (a.value().array() > T(0)).select(a.value(), a.value() * slope);
  return Tensor<T>::make(std::move(v), {a}, [slope](Node<T>& n) {
    auto& x = parent(n, 0);
    if (x.requires_grad) x.accumulate(Mat<T>((x.value.array() > T(0)).select(n.grad, n.grad * slope)));
  }, "leaky_relu");
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  Mat<T> v = a.value().array().tanh();
  return Tensor<T>::make(std::move(v), {a}, [](Node<T>& n) {
    auto& x = parent(n, 0);
    if (x.requires_grad) {
      const Mat<T> t = x.value.array().tanh();
      x.accumulate(Mat<T>(n.grad.array() * (T(1) - t.array().square())));
    }
  }, "tanh");
}

template <typename T>
Mat<T> sigmoid_of(const Mat<T>& x) {
  return (T(1) / (T(1) + (-x.array()).exp())).matrix();
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  Mat<T> v = sigmoid_of(a.value());
  return Tensor<T>::make(std::move(v), {a}, [](Node<T>& n) {
    auto& x = parent(n, 0);
    if (x.requires_grad) {
      const Mat<T> s = sigmoid_of(x.value);
      x.accumulate(Mat<T>(n.grad.array() * s.array() * (T(1) - s.array())));
    }
  }, "sigmoid");
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: nothing to concatenate");
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != parts[0].rows()) throw ContractViolation("concat_cols: row counts differ");
    cols += p.cols();
  }
  Mat<T> v(parts[0].rows(), cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    v.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  return Tensor<T>::make(std::move(v), parts, [offsets](Node<T>& n) {
    for (std::size_t k = 0; k < n.parents.size(); ++k) {
      auto& p = *n.parents[k];
      if (p.requires_grad) p.accumulate(Mat<T>(n.grad.middleCols(offsets[k], p.value.cols())));
    }
  }, "concat_cols");
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, Eigen::Index offset, Eigen::Index width) {
  if (offset < 0 || offset + width > a.cols()) throw ContractViolation("slice_cols: out of range");
  Mat<T> v = a.value().middleCols(offset, width);
  return Tensor<T>::make(std::move(v), {a}, [offset, width](Node<T>& n) {
    auto& x = parent(n, 0);
    if (!x.requires_grad) return;
    Mat<T> g = Mat<T>::Zero(x.value.rows(), x.value.cols());
    g.middleCols(offset, width) = n.grad;
    x.accumulate(g);
  }, "slice_cols");
}

// Rows selected by index (repeats allowed).
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& a, std::vector<Eigen::Index> rows) {
  Mat<T> v(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) v.row(r) = a.value().row(rows[r]);
  return Tensor<T>::make(std::move(v), {a}, [rows = std::move(rows)](Node<T>& n) {
    auto& x = parent(n, 0);
    if (!x.requires_grad) return;
    Mat<T> g = Mat<T>::Zero(x.value.rows(), x.value.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) g.row(rows[r]) += n.grad.row(r);
    x.accumulate(g);
  }, "gather_rows");
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  Mat<T> v(1, 1);
  v(0, 0) = a.value().sum();
  return Tensor<T>::make(std::move(v), {a}, [](Node<T>& n) {
    auto& x = parent(n, 0);
    if (x.requires_grad) x.accumulate(Mat<T>::Constant(x.value.rows(), x.value.cols(), n.grad(0, 0)));
  }, "sum");
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  const T count = static_cast<T>(a.value().size());
  return scale(sum(a), T(1) / count);
}

// Euclidean norm of each row (rows x 1); eps keeps the gradient finite at 0.
template <typename T>
Tensor<T> row_norm(const Tensor<T>& a, T eps = T(1e-12)) {
  Mat<T> v = (a.value().rowwise().squaredNorm().array() + eps).sqrt().matrix();
  Mat<T> norms = v;
  return Tensor<T>::make(std::move(v), {a}, [norms](Node<T>& n) {
    auto& x = parent(n, 0);
    if (!x.requires_grad) return;
    const Mat<T> coef = n.grad.cwiseQuotient(norms);
    x.accumulate(Mat<T>(x.value.array().colwise() * coef.col(0).array()));
  }, "row_norm");
}

template <typename T>
Mat<T> softmax_rows(const Mat<T>& logits) {
  Mat<T> e = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
  return (e.array().colwise() / e.rowwise().sum().array()).matrix();
}

// Mean over rows of -sum_k target_k log softmax(logits)_k.
template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, const Mat<T>& target) {
  if (logits.rows() != target.rows() || logits.cols() != target.cols()) {
    throw ContractViolation("softmax_cross_entropy: shape");
  }
  const Mat<T> shifted = logits.value().colwise() - logits.value().rowwise().maxCoeff();
  const Mat<T> log_z = shifted.array().exp().rowwise().sum().log().matrix();
  const Mat<T> log_p = shifted.colwise() - log_z.col(0);
  Mat<T> v(1, 1);
  v(0, 0) = -(target.cwiseProduct(log_p)).sum() / static_cast<T>(logits.rows());
  return Tensor<T>::make(std::move(v), {logits}, [target](Node<T>& n) {
    auto& x = parent(n, 0);
    if (!x.requires_grad) return;
    const Mat<T> p = softmax_rows(x.value);
    const T rows = static_cast<T>(x.value.rows());
    const Mat<T> rowsum = target.rowwise().sum();
    Mat<T> g = (p.array().colwise() * rowsum.col(0).array()).matrix() - target;
    x.accumulate(Mat<T>(g * (n.grad(0, 0) / rows)));
  }, "softmax_cross_entropy");
}

// sum_r w_r * BCE(sigmoid(logit_r), y_r) for logits of shape rows x 1.
template <typename T>
Tensor<T> weighted_bce_with_logits(const Tensor<T>& logits, const Mat<T>& targets,
                                   const Mat<T>& weights) {
  if (logits.cols() != 1 || targets.rows() != logits.rows() || weights.rows() != logits.rows()) {
    throw ContractViolation("weighted_bce_with_logits: shape");
  }
  const auto& z = logits.value();
  // log(1 + exp(-|z|)) + max(z, 0) - z y
  const Mat<T> loss = (((-z.array().abs()).exp() + T(1)).log() + z.array().max(T(0)) -
                       z.array() * targets.array())
                          .matrix();
  Mat<T> v(1, 1);
  v(0, 0) = loss.cwiseProduct(weights).sum();
  return Tensor<T>::make(std::move(v), {logits}, [targets, weights](Node<T>& n) {
    auto& x = parent(n, 0);
    if (!x.requires_grad) return;
    const Mat<T> g = (sigmoid_of(x.value) - targets).cwiseProduct(weights) * n.grad(0, 0);
    x.accumulate(g);
  }, "weighted_bce_with_logits");
}

// Per-row BCE losses from logits, no tape.
template <typename T>
Mat<T> bce_losses(const Mat<T>& logits, const Mat<T>& targets) {
  return (((-logits.array().abs()).exp() + T(1)).log() + logits.array().max(T(0)) -
          logits.array() * targets.array())
      .matrix();
}

// Gumbel-softmax over each row of `logits` with fixed noise `gumbel`. The hard
// variant emits the one-hot argmax of the soft sample in the forward pass and
// back-propagates through the soft sample (straight-through).
template <typename T>
Tensor<T> gumbel_softmax(const Tensor<T>& logits, const Mat<T>& gumbel, T temperature, bool hard) {
  if (!(temperature > T(0))) throw ContractViolation("gumbel_softmax: temperature must be positive");
  if (gumbel.rows() != logits.rows() || gumbel.cols() != logits.cols()) {
    throw ContractViolation("gumbel_softmax: noise shape");
  }
  Mat<T> soft = softmax_rows(Mat<T>((logits.value() + gumbel) / temperature));
  Mat<T> out = soft;
  if (hard) {
    out.setZero();
    for (Eigen::Index r = 0; r < soft.rows(); ++r) {
      Eigen::Index k = 0;
      soft.row(r).maxCoeff(&k);
      out(r, k) = T(1);
    }
  }
  return Tensor<T>::make(std::move(out), {logits}, [soft = std::move(soft), temperature](Node<T>& n) {
    auto& x = parent(n, 0);
    if (!x.requires_grad) return;
    const Mat<T> gs = n.grad.cwiseProduct(soft);
    const Mat<T> g = (gs - (soft.array().colwise() * gs.rowwise().sum().array()).matrix()) / temperature;
    x.accumulate(g);
  }, "gumbel_softmax");
}

template <typename T>
Mat<T> sample_gumbel(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat<T> g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double x = u(rng);
      x = std::min(std::max(x, 1e-20), 1.0 - 1e-12);
      g(r, c) = static_cast<T>(-std::log(-std::log(x)));
    }
  return g;
}

template <typename T>
Mat<T> sample_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat<T> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = static_cast<T>(nd(rng));
  return m;
}

}  // namespace antidote::nn

#endif  // ANTIDOTE_NN_OPS_HPP_
