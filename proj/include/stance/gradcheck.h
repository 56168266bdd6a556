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

#ifndef STANCE_GRADCHECK_H_
#define STANCE_GRADCHECK_H_

#include <functional>
#include <span>

#include "stance/tensor.h"

namespace stance {

// Central-difference gradient of `f` at `x`: (f(x + h e_i) - f(x - h e_i)) / 2h
// per coordinate. `x` is perturbed in place (so `f` may read it through a
// shared handle) and restored bit-exactly before returning.
Tensor FiniteDifferenceGrad(const std::function<double(const Tensor&)>& f,
                            Tensor x, double h = 1e-5);

// Gradients with norm below this are compared in absolute terms. Central
// differences at h = 1e-5 carry roughly 1e-11 of rounding noise, so an
// identically zero gradient (e.g. a bias feeding a softmax) still passes.
inline constexpr double kRelativeErrorFloor = 1e-6;

// ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2, floor).
double RelativeError(std::span<const double> analytic,
                     std::span<const double> numeric);

}  // namespace stance

#endif  // STANCE_GRADCHECK_H_
