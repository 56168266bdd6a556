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

#ifndef STANCE_EVAL_H_
#define STANCE_EVAL_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stance/corpus.h"

namespace stance {

// Rows are gold labels, columns predictions, both in FAVOR, AGAINST, NONE
// order.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  // Throws DimensionError on a length mismatch.
  static ConfusionMatrix FromLabels(std::span<const Stance> gold, std::span<const Stance> pred);

  void Add(Stance gold, Stance pred) { ++counts_[Index(gold)][Index(pred)]; }
  std::size_t count(Stance gold, Stance pred) const { return counts_[Index(gold)][Index(pred)]; }
  std::size_t total() const;
  std::size_t correct() const;

  std::size_t true_positives(Stance c) const { return count(c, c); }
  std::size_t false_positives(Stance c) const;
  std::size_t false_negatives(Stance c) const;

 private:
  static std::size_t Index(Stance s) { return static_cast<std::size_t>(s); }
  std::array<std::array<std::size_t, 3>, 3> counts_{};
};

// Any 0/0 is taken as 0.
double Precision(const ConfusionMatrix& cm, Stance c);
double Recall(const ConfusionMatrix& cm, Stance c);
double F1(const ConfusionMatrix& cm, Stance c);

// Mean of the FAVOR and AGAINST F1 scores. NONE predictions still count as
// false positives / negatives for those two classes.
double MacroFFavorAgainst(const ConfusionMatrix& cm);

// Fraction of correct labels over all three classes. Throws EmptyInputError
// when the matrix is empty.
double Accuracy3(const ConfusionMatrix& cm);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold_count = 0;
  std::size_t predicted_count = 0;
};

struct Metrics {
  ConfusionMatrix confusion;
  std::array<ClassScores, 3> per_class{};
  double macro_f = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;

  static Metrics From(const ConfusionMatrix& cm);
};

struct EvalReport {
  Metrics overall;
  // Targets in first-appearance order.
  std::vector<std::pair<std::string, Metrics>> per_target;
};

EvalReport MakeReport(std::span<const Stance> gold, std::span<const Stance> pred,
                      std::span<const std::string> targets);

// Fixed-width table, one row per target plus "Overall".
void WriteReportTable(std::ostream& out, const EvalReport& report, bool per_target);
// key=value lines, e.g. `overall.macro_f=0.688400`, `target[Atheism].accuracy3=...`.
void WriteReportKeyValues(std::ostream& out, const EvalReport& report, bool per_target);

// Pairs a gold and a prediction TSV row by row. IDs and targets must agree.
EvalReport EvaluateFiles(const std::filesystem::path& gold_path,
                         const std::filesystem::path& pred_path);

}  // namespace stance

#endif  // STANCE_EVAL_H_
