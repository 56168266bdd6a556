// Copyright 2026 The Stance Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stance/optimizer.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "stance/errors.h"

namespace stance {

std::string OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind ParseOptimizerKind(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "sgd") return OptimizerKind::kSgd;
  if (lower == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

Optimizer::Optimizer(OptimizerOptions options) : options_(options) {
  if (!(options_.learning_rate > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
}

void Optimizer::Step(std::span<Tensor> params) {
  for (const Tensor& p : params) {
    if (!p.requires_grad() || !p.has_grad()) {
      throw ContractError("optimizer step on a parameter without gradient, shape " +
                          ShapeString(p.shape()));
    }
  }
  const double lr = options_.learning_rate;
  ++step_count_;

  if (options_.kind == OptimizerKind::kSgd) {
    for (Tensor& p : params) {
      auto values = p.mutable_values();
      auto grad = p.grad();
      for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * grad[i];
      p.ZeroGrad();
    }
    return;
  }

  if (first_moment_.empty()) {
    for (const Tensor& p : params) {
      first_moment_.emplace_back(p.size(), 0.0);
      second_moment_.emplace_back(p.size(), 0.0);
    }
  }
  if (first_moment_.size() != params.size()) {
    throw ContractError("optimizer parameter list changed between steps");
  }

  const double b1 = options_.beta1, b2 = options_.beta2;
  const double t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    auto& m = first_moment_[k];
    auto& v = second_moment_[k];
    if (m.size() != p.size()) {
      throw ContractError("optimizer moment shape does not match parameter " +
                          ShapeString(p.shape()));
    }
    auto values = p.mutable_values();
    auto grad = p.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
    p.ZeroGrad();
  }
}

double ClipGradNorm(std::span<Tensor> params, double max_norm) {
  double sq = 0.0;
  for (const Tensor& p : params)
    for (double g : p.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (Tensor& p : params)
      for (double& g : p.mutable_grad()) g *= factor;
  }
  return norm;
}

}  // namespace stance
