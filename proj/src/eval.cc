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

#include "stance/eval.h"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <iterator>
#include <ostream>

#include "stance/errors.h"

namespace stance {
namespace {

double SafeDiv(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void WriteMetricLines(std::ostream& out, const std::string& prefix, const Metrics& m) {
  out << prefix << ".count=" << m.total << "\n";
  for (Stance s : kAllStances) {
    const ClassScores& c = m.per_class[static_cast<std::size_t>(s)];
    std::string name(StanceName(s));
    for (char& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    out << prefix << ".precision." << name << "=" << c.precision << "\n"
        << prefix << ".recall." << name << "=" << c.recall << "\n"
        << prefix << ".f1." << name << "=" << c.f1 << "\n";
  }
  out << prefix << ".macro_f=" << m.macro_f << "\n"
      << prefix << ".accuracy3=" << m.accuracy << "\n";
}

void WriteTableRow(std::ostream& out, const std::string& name, const Metrics& m) {
  const auto& pc = m.per_class;
  out << std::left << std::setw(36) << name << std::right << std::setw(6) << m.total
      << std::setw(10) << pc[0].f1 * 100 << std::setw(10) << pc[1].f1 * 100
      << std::setw(10) << pc[2].f1 * 100 << std::setw(10) << m.macro_f * 100
      << std::setw(10) << m.accuracy * 100 << "\n";
}

}  // namespace

ConfusionMatrix ConfusionMatrix::FromLabels(std::span<const Stance> gold,
                                            std::span<const Stance> pred) {
  if (gold.size() != pred.size()) {
    throw DimensionError("confusion matrix: " + std::to_string(gold.size()) +
                         " gold labels but " + std::to_string(pred.size()) + " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) cm.Add(gold[i], pred[i]);
  return cm;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts_)
    for (std::size_t c : row) n += c;
  return n;
}

std::size_t ConfusionMatrix::correct() const {
  return counts_[0][0] + counts_[1][1] + counts_[2][2];
}

std::size_t ConfusionMatrix::false_positives(Stance c) const {
  std::size_t n = 0;
  for (Stance g : kAllStances)
    if (g != c) n += count(g, c);
  return n;
}

std::size_t ConfusionMatrix::false_negatives(Stance c) const {
  std::size_t n = 0;
  for (Stance p : kAllStances)
    if (p != c) n += count(c, p);
  return n;
}

double Precision(const ConfusionMatrix& cm, Stance c) {
  const double tp = static_cast<double>(cm.true_positives(c));
  return SafeDiv(tp, tp + static_cast<double>(cm.false_positives(c)));
}

double Recall(const ConfusionMatrix& cm, Stance c) {
  const double tp = static_cast<double>(cm.true_positives(c));
  return SafeDiv(tp, tp + static_cast<double>(cm.false_negatives(c)));
}

double F1(const ConfusionMatrix& cm, Stance c) {
  const double p = Precision(cm, c), r = Recall(cm, c);
  return SafeDiv(2.0 * p * r, p + r);
}

double MacroFFavorAgainst(const ConfusionMatrix& cm) {
  return (F1(cm, Stance::kFavor) + F1(cm, Stance::kAgainst)) / 2.0;
}

double Accuracy3(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyInputError("accuracy of an empty evaluation set");
  return static_cast<double>(cm.correct()) / static_cast<double>(cm.total());
}

Metrics Metrics::From(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  m.total = cm.total();
  for (Stance s : kAllStances) {
    ClassScores& c = m.per_class[static_cast<std::size_t>(s)];
    c.precision = Precision(cm, s);
    c.recall = Recall(cm, s);
    c.f1 = F1(cm, s);
    c.gold_count = cm.true_positives(s) + cm.false_negatives(s);
    c.predicted_count = cm.true_positives(s) + cm.false_positives(s);
  }
  m.macro_f = MacroFFavorAgainst(cm);
  m.accuracy = Accuracy3(cm);
  return m;
}

EvalReport MakeReport(std::span<const Stance> gold, std::span<const Stance> pred,
                      std::span<const std::string> targets) {
  if (gold.size() != pred.size() || gold.size() != targets.size()) {
    throw DimensionError("report: gold, prediction and target lists differ in length");
  }
  EvalReport report;
  report.overall = Metrics::From(ConfusionMatrix::FromLabels(gold, pred));

  std::vector<std::pair<std::string, ConfusionMatrix>> by_target;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto it = std::find_if(by_target.begin(), by_target.end(),
                           [&](const auto& e) { return e.first == targets[i]; });
    if (it == by_target.end()) {
      by_target.emplace_back(targets[i], ConfusionMatrix{});
      it = std::prev(by_target.end());
    }
    it->second.Add(gold[i], pred[i]);
  }
  for (const auto& [target, cm] : by_target) {
    report.per_target.emplace_back(target, Metrics::From(cm));
  }
  return report;
}

void WriteReportTable(std::ostream& out, const EvalReport& report, bool per_target) {
  const auto flags = out.flags();
  out << std::left << std::setw(36) << "Target" << std::right << std::setw(6) << "n"
      << std::setw(10) << "F-favor" << std::setw(10) << "F-against" << std::setw(10)
      << "F-none" << std::setw(10) << "MacroF" << std::setw(10) << "Acc3" << "\n";
  out << std::fixed << std::setprecision(2);
  if (per_target) {
    for (const auto& [target, m] : report.per_target) WriteTableRow(out, target, m);
  }
  WriteTableRow(out, "Overall", report.overall);
  out.flags(flags);
}

void WriteReportKeyValues(std::ostream& out, const EvalReport& report, bool per_target) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(6);
  WriteMetricLines(out, "overall", report.overall);
  if (per_target) {
    for (const auto& [target, m] : report.per_target) {
      WriteMetricLines(out, "target[" + target + "]", m);
    }
  }
  out.flags(flags);
  out.precision(precision);
}

EvalReport EvaluateFiles(const std::filesystem::path& gold_path,
                         const std::filesystem::path& pred_path) {
  const auto gold = LoadSemEval(gold_path);
  const auto pred = LoadSemEval(pred_path);
  if (gold.size() != pred.size()) {
    throw FormatError("gold file has " + std::to_string(gold.size()) +
                      " rows but prediction file has " + std::to_string(pred.size()));
  }
  std::vector<Stance> g, p;
  std::vector<std::string> targets;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].id != pred[i].id || gold[i].target != pred[i].target) {
      throw FormatError("row " + std::to_string(i + 1) + ": prediction for ID '" +
                        pred[i].id + "' does not line up with gold ID '" + gold[i].id + "'");
    }
    g.push_back(gold[i].stance);
    p.push_back(pred[i].stance);
    targets.push_back(gold[i].target);
  }
  return MakeReport(g, p, targets);
}

}  // namespace stance
