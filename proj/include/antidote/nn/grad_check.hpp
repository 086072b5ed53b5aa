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

#ifndef ANTIDOTE_NN_GRAD_CHECK_HPP_
#define ANTIDOTE_NN_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "antidote/nn/tensor.hpp"

namespace antidote::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  long checked = 0;
  long skipped_kinks = 0;  // entries where one-sided slopes disagree
};

// Compares tape gradients of `loss` against central differences for every
// entry of `params`. `loss` must be deterministic (fixed noise) and rebuild
// the tape on each call.
inline GradCheckResult grad_check(const std::function<Tensor<double>()>& loss,
                                  std::vector<Tensor<double>> params, double step = 1e-6,
                                  double floor = 1e-6) {
  for (auto& p : params) p.zero_grad();
  loss().backward();
  std::vector<Mat<double>> analytic;
  for (auto& p : params) {
    analytic.push_back(p.has_grad() ? p.grad() : Mat<double>::Zero(p.rows(), p.cols()));
  }
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    for (Eigen::Index i = 0; i < p.value().size(); ++i) {
      double* x = p.mutable_value().data() + i;
      const double orig = *x;
      const double f0 = loss().item();
      *x = orig + step;
      const double fp = loss().item();
      *x = orig - step;
      const double fm = loss().item();
      *x = orig;
      const double right = (fp - f0) / step;
      const double left = (f0 - fm) / step;
      const double scale = std::max({std::abs(right), std::abs(left), 1.0});
      if (std::abs(right - left) > 1e-3 * scale) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (fp - fm) / (2 * step);
      const double a = analytic[k].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
      ++result.checked;
    }
  }
  for (auto& p : params) p.zero_grad();
  return result;
}

}  // namespace antidote::nn

#endif  // ANTIDOTE_NN_GRAD_CHECK_HPP_
