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

#include "stance/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stance/errors.h"

namespace stance {

Tensor FiniteDifferenceGrad(const std::function<double(const Tensor&)>& f,
                            Tensor x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  std::vector<double> grad(x.size());
  auto values = x.mutable_values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double original = values[i];
    values[i] = original + h;
    const double up = f(x);
    values[i] = original - h;
    const double down = f(x);
    values[i] = original;
    grad[i] = (up - down) / (2.0 * h);
  }
  return Tensor::FromValues(x.shape(), std::move(grad));
}

double RelativeError(std::span<const double> analytic,
                     std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw DimensionError("relative error: length mismatch");
  }
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nn), kRelativeErrorFloor});
  return std::sqrt(diff) / denom;
}

}  // namespace stance
