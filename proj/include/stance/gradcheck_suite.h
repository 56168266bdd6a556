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

#ifndef STANCE_GRADCHECK_SUITE_H_
#define STANCE_GRADCHECK_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace stance {

struct GradCheckResult {
  std::string name;
  double relative_error = 0.0;
  bool passed = false;
};

struct GradCheckOptions {
  std::uint64_t seed = 7;
  double step = 1e-5;
  double tolerance = 1e-4;
};

// Compares analytic gradients with central differences for every primitive
// operation and for every parameter of both phases of a small cascade
// (embedding size 6, hidden size 4, two 5-token examples).
std::vector<GradCheckResult> RunGradCheckSuite(const GradCheckOptions& options = {});

}  // namespace stance

#endif  // STANCE_GRADCHECK_SUITE_H_
