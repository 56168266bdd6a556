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

// Label-list recount of the stance metrics, written without the confusion
// matrix so the two can be checked against each other.

#ifndef STANCE_TESTS_METRIC_ORACLE_H_
#define STANCE_TESTS_METRIC_ORACLE_H_

#include <cstddef>
#include <vector>

#include "stance/corpus.h"

namespace stance::testing {

struct OracleScores {
  double macro_f = 0.0;
  double accuracy3 = 0.0;
};

inline double OracleF1(const std::vector<Stance>& gold, const std::vector<Stance>& pred,
                       Stance c) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pred[i] == c && gold[i] == c) ++tp;
    if (pred[i] == c && gold[i] != c) ++fp;
    if (pred[i] != c && gold[i] == c) ++fn;
  }
  const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

inline OracleScores Recount(const std::vector<Stance>& gold, const std::vector<Stance>& pred) {
  OracleScores s;
  s.macro_f = (OracleF1(gold, pred, Stance::kFavor) + OracleF1(gold, pred, Stance::kAgainst)) / 2.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == pred[i];
  s.accuracy3 = static_cast<double>(hits) / static_cast<double>(gold.size());
  return s;
}

}  // namespace stance::testing

#endif  // STANCE_TESTS_METRIC_ORACLE_H_
