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

#ifndef ANTIDOTE_NN_TENSOR_HPP_
#define ANTIDOTE_NN_TENSOR_HPP_

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "antidote/common.hpp"

namespace antidote::nn {

template <typename T>
using Mat = MatrixT<T>;

template <typename T>
struct Node {
  Mat<T> value;
  Mat<T> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Pushes this node's grad into its parents.
  std::function<void(Node&)> backward;

  void accumulate(const Mat<T>& g) {
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
};

// Two-dimensional (rows x cols) value on the autodiff tape. Copies share the
// node; ops build new nodes and only record parents that require gradients.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Mat<T> value) {
    Tensor t;
    t.node_ = std::make_shared<Node<T>>();
    t.node_->value = std::move(value);
    return t;
  }

  static Tensor parameter(Mat<T> value) {
    Tensor t = constant(std::move(value));
    t.node_->requires_grad = true;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Mat<T>& value() const { return node_->value; }
  Mat<T>& mutable_value() { return node_->value; }
  const Mat<T>& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  bool requires_grad() const { return node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  T item() const { return node_->value(0, 0); }
  void zero_grad() { node_->grad.resize(0, 0); }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

  // Reverse sweep from a 1x1 tensor.
  void backward() const {
    if (rows() != 1 || cols() != 1) throw ContractViolation("backward() needs a scalar");
    if (!requires_grad()) return;
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, bool>> stack{{node_.get(), false}};
    while (!stack.empty()) {
      auto [n, expanded] = stack.back();
      stack.pop_back();
      if (expanded) {
        order.push_back(n);
        continue;
      }
      if (!seen.insert(n).second) continue;
      stack.push_back({n, true});
      for (const auto& p : n->parents)
        if (p->requires_grad && !seen.count(p.get())) stack.push_back({p.get(), false});
    }
    node_->accumulate(Mat<T>::Ones(1, 1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node<T>* n = *it;
      if (n->backward && n->grad.size() != 0) {
        n->backward(*n);
        // Interior grads are not needed after propagation.
        n->grad.resize(0, 0);
      }
    }
  }

  // New node computed from `parents`; `backward` is recorded only when a
  // parent requires gradients.
  static Tensor make(Mat<T> value, std::vector<Tensor> parents, std::function<void(Node<T>&)> backward,
                     const char* op) {
    if (!value.allFinite()) throw NumericalError(std::string("non-finite value produced by ") + op);
    Tensor t = constant(std::move(value));
    for (auto& p : parents) {
      if (p.requires_grad()) {
        t.node_->requires_grad = true;
        break;
      }
    }
    if (t.node_->requires_grad) {
      for (auto& p : parents) t.node_->parents.push_back(p.node_);
      t.node_->backward = std::move(backward);
    }
    return t;
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

template <typename T>
inline Node<T>& parent(Node<T>& n, std::size_t k) {
  return *n.parents[k];
}

}  // namespace antidote::nn

#endif  // ANTIDOTE_NN_TENSOR_HPP_
