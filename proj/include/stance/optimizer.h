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

#ifndef STANCE_OPTIMIZER_H_
#define STANCE_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stance/tensor.h"

namespace stance {

enum class OptimizerKind { kSgd, kAdam };

std::string OptimizerName(OptimizerKind kind);
// Accepts "sgd" / "adam" (case-insensitive); throws std::invalid_argument.
OptimizerKind ParseOptimizerKind(const std::string& name);

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First-order optimizer over a fixed, ordered parameter list. Adam moments
// are allocated lazily on the first step and matched to parameters by
// position, so the same list must be passed on every call.
class Optimizer {
 public:
  explicit Optimizer(OptimizerOptions options);

  // Applies one update from the accumulated gradients, then zeroes them.
  void Step(std::span<Tensor> params);

  const OptimizerOptions& options() const { return options_; }
  std::int64_t step_count() const { return step_count_; }
  std::span<const std::vector<double>> first_moments() const { return first_moment_; }
  std::span<const std::vector<double>> second_moments() const { return second_moment_; }

 private:
  OptimizerOptions options_;
  std::int64_t step_count_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

// Rescales all gradients so their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double ClipGradNorm(std::span<Tensor> params, double max_norm);

}  // namespace stance

#endif  // STANCE_OPTIMIZER_H_
