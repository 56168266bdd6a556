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

#include "stance/gradcheck_suite.h"

#include <functional>
#include <random>

#include "stance/gradcheck.h"
#include "stance/model.h"
#include "stance/pipeline.h"
#include "stance/tensor.h"

namespace stance {
namespace {

using Builder = std::function<Tensor(Tape&)>;

class SuiteRunner {
 public:
  explicit SuiteRunner(const GradCheckOptions& options)
      : options_(options), rng_(options.seed) {}

  Tensor Random(Shape shape) { return Tensor::Uniform(std::move(shape), 2.0, rng_, true); }

  // Checks d(sum(C * build()))/d(wrt) with fixed random weights C.
  void CheckOp(const std::string& name, const Builder& build, Tensor wrt) {
    Tensor weights;
    {
      Tape probe(false);
      const Tensor out = build(probe);
      weights = Tensor::Uniform(out.shape(), 1.0, rng_);
    }
    auto loss_of = [&](Tape& tape) { return tape.Sum(tape.Mul(build(tape), weights)); };
    Check(name, loss_of, std::move(wrt));
  }

  // Checks d(loss())/d(wrt) where the builder already returns a scalar.
  void Check(const std::string& name, const Builder& loss_of, Tensor wrt) {
    wrt.ZeroGrad();
    {
      Tape tape;
      tape.Backward(loss_of(tape));
    }
    const std::vector<double> analytic(wrt.grad().begin(), wrt.grad().end());
    const Tensor numeric = FiniteDifferenceGrad(
        [&](const Tensor&) {
          Tape tape(false);
          return loss_of(tape).item();
        },
        wrt, options_.step);
    wrt.ZeroGrad();
    const double err = RelativeError(analytic, numeric.values());
    results_.push_back({name, err, err < options_.tolerance});
  }

  std::mt19937_64& rng() { return rng_; }
  std::vector<GradCheckResult> Take() { return std::move(results_); }

 private:
  GradCheckOptions options_;
  std::mt19937_64 rng_;
  std::vector<GradCheckResult> results_;
};

void CheckPrimitives(SuiteRunner& s) {
  Tensor a = s.Random({3, 3}), b = s.Random({3, 3});
  s.Check("matmul.sum.lhs", [&](Tape& t) { return t.Sum(t.MatMul(a, b)); }, a);
  s.CheckOp("matmul.lhs", [&](Tape& t) { return t.MatMul(a, b); }, a);
  s.CheckOp("matmul.rhs", [&](Tape& t) { return t.MatMul(a, b); }, b);

  Tensor x = s.Random({3, 4}), y = s.Random({3, 4});
  s.CheckOp("add.lhs", [&](Tape& t) { return t.Add(x, y); }, x);
  s.CheckOp("add.rhs", [&](Tape& t) { return t.Add(x, y); }, y);
  s.CheckOp("mul.lhs", [&](Tape& t) { return t.Mul(x, y); }, x);
  s.CheckOp("mul.rhs", [&](Tape& t) { return t.Mul(x, y); }, y);
  s.CheckOp("sigmoid", [&](Tape& t) { return t.Sigmoid(x); }, x);
  s.CheckOp("tanh", [&](Tape& t) { return t.Tanh(x); }, x);
  s.CheckOp("scale", [&](Tape& t) { return t.Scale(x, -1.7); }, x);

  Tensor bias = s.Random({4});
  s.CheckOp("add_row_bias.input", [&](Tape& t) { return t.AddRowBias(x, bias); }, x);
  s.CheckOp("add_row_bias.bias", [&](Tape& t) { return t.AddRowBias(x, bias); }, bias);

  Tensor wide = s.Random({3, 2});
  s.CheckOp("concat_rows.lhs", [&](Tape& t) { return t.ConcatRows(x, wide); }, x);
  s.CheckOp("concat_rows.rhs", [&](Tape& t) { return t.ConcatRows(x, wide); }, wide);

  Tensor r0 = s.Random({1, 4}), r1 = s.Random({4});
  s.CheckOp("stack_rows",
            [&](Tape& t) {
              const std::vector<Tensor> rows{r0, r1, r0};
              return t.StackRows(rows);
            },
            r0);
  s.CheckOp("row", [&](Tape& t) { return t.Row(x, 1); }, x);
  s.CheckOp("slice_cols", [&](Tape& t) { return t.SliceCols(x, 1, 3); }, x);
  const std::vector<std::size_t> ids{2, 0, 2, 1};
  s.CheckOp("gather_rows", [&](Tape& t) { return t.GatherRows(x, ids); }, x);
  s.CheckOp("reshape", [&](Tape& t) { return t.Reshape(x, {4, 3}); }, x);

  Tensor v = s.Random({5});
  s.CheckOp("softmax", [&](Tape& t) { return t.Softmax(v); }, v);
  s.CheckOp("mean_rows", [&](Tape& t) { return t.MeanRows(x); }, x);
  s.Check("sum", [&](Tape& t) { return t.Sum(t.Mul(x, x)); }, x);

  Tensor logits = s.Random({3});
  s.Check("cross_entropy", [&](Tape& t) { return t.CrossEntropy(logits, 2); }, logits);
}

void CheckCascade(SuiteRunner& s, std::uint64_t seed) {
  ModelConfig config;
  config.vocab_size = 12;
  config.embed_dim = 6;
  config.hidden_dim = 4;

  std::uniform_int_distribution<std::size_t> token(2, config.vocab_size - 1);
  auto sequence = [&](std::size_t n) {
    std::vector<TokenId> ids(n);
    for (auto& id : ids) id = token(s.rng());
    return ids;
  };
  const auto target = sequence(2);
  const auto tokens_a = sequence(5), tokens_b = sequence(5);
  auto make = [&](const std::vector<TokenId>& tokens, Stance stance) {
    return EncodedExample{tokens, target, DerivePhase1(stance), stance};
  };
  const std::vector<EncodedExample> phase1_batch{make(tokens_a, Stance::kFavor),
                                                 make(tokens_b, Stance::kNone)};
  const std::vector<EncodedExample> phase2_batch{make(tokens_a, Stance::kFavor),
                                                 make(tokens_b, Stance::kAgainst)};

  struct PhaseCase {
    std::string prefix;
    Phase phase;
    const std::vector<EncodedExample>* batch;
  };
  for (const PhaseCase& pc : {PhaseCase{"phase1.", Phase::kSubjectivity, &phase1_batch},
                              PhaseCase{"phase2.", Phase::kPolarity, &phase2_batch}}) {
    config.seed = seed + (pc.phase == Phase::kSubjectivity ? 0 : 1);
    const PhaseModel model = PhaseModel::Init(config);
    const auto params = model.Parameters();
    const auto names = PhaseModel::ParameterNames();
    for (std::size_t k = 0; k < params.size(); ++k) {
      s.Check(pc.prefix + names[k],
              [&](Tape& t) { return PhaseLoss(t, model, *pc.batch, pc.phase); }, params[k]);
    }
  }
}

}  // namespace

std::vector<GradCheckResult> RunGradCheckSuite(const GradCheckOptions& options) {
  SuiteRunner runner(options);
  CheckPrimitives(runner);
  CheckCascade(runner, options.seed);
  return runner.Take();
}

}  // namespace stance
