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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "stance/errors.h"
#include "stance/gradcheck.h"
#include "stance/gradcheck_suite.h"
#include "stance/optimizer.h"
#include "stance/tensor.h"

using namespace stance;

namespace {

Tensor M(Shape shape, std::vector<double> values, bool grad = false) {
  return Tensor::FromValues(std::move(shape), std::move(values), grad);
}

std::vector<double> Vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("tensor construction") {
  const Tensor t = Tensor::Zeros({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_FALSE(t.has_grad());
  CHECK(Tensor::Zeros({2}, true).has_grad());
  CHECK_THROWS_AS(Tensor::Zeros({0, 3}), DimensionError);
  CHECK_THROWS_AS(M({2, 2}, {1, 2, 3}), DimensionError);

  Tensor a = M({2}, {1, 2}, true);
  Tensor b = a.Clone();
  b.mutable_values()[0] = 9;
  CHECK(a[0] == 1);
  CHECK_FALSE(a.SameNode(b));
}

TEST_CASE("matmul") {
  Tape tape;
  SUBCASE("identity") {
    const Tensor c = tape.MatMul(M({2, 2}, {1, 0, 0, 1}), M({2, 2}, {3, 4, 5, 6}));
    CHECK(Vec(c.values()) == std::vector<double>{3, 4, 5, 6});
  }
  SUBCASE("row times column") {
    const Tensor c = tape.MatMul(M({1, 2}, {1, 2}), M({2, 1}, {3, 4}));
    CHECK(c.shape() == Shape{1, 1});
    CHECK(c.item() == 11);
  }
  SUBCASE("shape mismatch names both shapes") {
    try {
      tape.MatMul(M({2, 3}, std::vector<double>(6)), M({2, 3}, std::vector<double>(6)));
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[2x3]") != std::string::npos);
      CHECK(msg.find("[2x3] . [2x3]") != std::string::npos);
    }
    CHECK_THROWS_AS(tape.MatMul(M({3}, {1, 2, 3}), M({3, 1}, {1, 2, 3})), DimensionError);
  }
}

TEST_CASE("gradient of sum(A.B) w.r.t. A matches finite differences") {
  std::mt19937_64 rng(11);
  Tensor a = Tensor::Uniform({3, 3}, 2.0, rng, true);
  const Tensor b = Tensor::Uniform({3, 3}, 2.0, rng);
  {
    Tape tape;
    tape.Backward(tape.Sum(tape.MatMul(a, b)));
  }
  const Tensor numeric = FiniteDifferenceGrad(
      [&](const Tensor&) {
        Tape t(false);
        return t.Sum(t.MatMul(a, b)).item();
      },
      a, 1e-5);
  CHECK(RelativeError(a.grad(), numeric.values()) < 1e-4);
  // Closed form: d/dA_ik sum_ij (AB)_ij = sum_j B_kj.
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(a.grad()[i * 3 + k] == doctest::Approx(b.at(k, 0) + b.at(k, 1) + b.at(k, 2)));
}

TEST_CASE("elementwise ops") {
  Tape tape;
  CHECK(tape.Sigmoid(Tensor::Scalar(0)).item() == 0.5);
  CHECK(tape.Tanh(Tensor::Scalar(0)).item() == 0.0);
  CHECK(tape.Sigmoid(Tensor::Scalar(-800)).item() >= 0.0);
  CHECK(std::isfinite(tape.Sigmoid(Tensor::Scalar(-800)).item()));
  CHECK_THROWS_AS(tape.Add(Tensor::Zeros({2}), Tensor::Zeros({3})), DimensionError);
  CHECK_THROWS_AS(tape.Mul(Tensor::Zeros({2, 1}), Tensor::Zeros({1, 2})), DimensionError);

  SUBCASE("product rule") {
    Tensor x = Tensor::Scalar(2, true), y = Tensor::Scalar(3, true);
    Tape t;
    t.Backward(t.Mul(x, y));
    CHECK(x.grad()[0] == 3.0);
    CHECK(y.grad()[0] == 2.0);
  }
  SUBCASE("tanh derivative is 1 - tanh^2") {
    Tensor x = Tensor::Scalar(0.7, true);
    Tape t;
    t.Backward(t.Tanh(x));
    CHECK(x.grad()[0] == doctest::Approx(1.0 - std::tanh(0.7) * std::tanh(0.7)).epsilon(1e-14));
  }
}

TEST_CASE("concat_rows") {
  Tape tape;
  CHECK(Vec(tape.ConcatRows(M({1, 2}, {1, 2}), M({1, 1}, {3})).values()) ==
        std::vector<double>{1, 2, 3});
  Tensor a = Tensor::Zeros({4, 3}, true), b = Tensor::Zeros({4, 3}, true);
  const Tensor c = tape.ConcatRows(a, b);
  CHECK(c.shape() == Shape{4, 6});
  tape.Backward(tape.Sum(c));
  CHECK(Vec(a.grad()) == std::vector<double>(12, 1.0));
  CHECK(Vec(b.grad()) == std::vector<double>(12, 1.0));
  Tape other;
  CHECK_THROWS_AS(other.ConcatRows(Tensor::Zeros({2, 1}), Tensor::Zeros({3, 1})), DimensionError);
}

TEST_CASE("softmax") {
  Tape tape;
  const Tensor u = tape.Softmax(M({3}, {0, 0, 0}));
  for (double p : u.values()) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const Tensor big = tape.Softmax(M({2}, {1000, 1000}));
  CHECK(big[0] == 0.5);
  CHECK(big[1] == 0.5);
  CHECK_THROWS_AS(tape.Softmax(M({2}, {0, std::numeric_limits<double>::quiet_NaN()})),
                  NumericError);
  CHECK_THROWS_AS(tape.Softmax(M({2}, {0, std::numeric_limits<double>::infinity()})),
                  NumericError);

  SUBCASE("jacobian matches finite differences") {
    std::mt19937_64 rng(5);
    for (int row = 0; row < 5; ++row) {
      Tensor x = Tensor::Uniform({5}, 2.0, rng, true);
      auto f = [&](const Tensor&) {
        Tape t(false);
        return t.Softmax(x)[row];
      };
      {
        Tape t;
        const Tensor y = t.Softmax(x);
        std::vector<double> pick(5, 0.0);
        pick[row] = 1.0;
        t.Backward(t.Sum(t.Mul(y, M({5}, pick))));
      }
      const Tensor numeric = FiniteDifferenceGrad(f, x, 1e-5);
      CHECK(RelativeError(x.grad(), numeric.values()) < 1e-4);
    }
  }

  SUBCASE("sums to one and is permutation-equivariant") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + trial % 9;
      std::vector<double> x(n);
      std::uniform_real_distribution<double> dist(-30, 30);
      for (double& v : x) v = dist(rng);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<double> xp(n);
      for (std::size_t i = 0; i < n; ++i) xp[i] = x[perm[i]];

      Tape t(false);
      const Tensor y = t.Softmax(M({n}, x));
      const Tensor yp = t.Softmax(M({n}, xp));
      const double total = std::accumulate(y.values().begin(), y.values().end(), 0.0);
      CHECK(std::abs(total - 1.0) < 1e-9);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(y[i] > 0.0);
        CHECK(std::abs(yp[i] - y[perm[i]]) < 1e-12);
      }
    }
  }
}

TEST_CASE("mean_rows") {
  Tape tape;
  CHECK(Vec(tape.MeanRows(M({2, 2}, {1, 3, 3, 1})).values()) == std::vector<double>{2, 2});
  CHECK(Vec(tape.MeanRows(M({1, 3}, {4, 5, 6})).values()) == std::vector<double>{4, 5, 6});
  Tensor x = Tensor::Zeros({4, 2}, true);
  tape.Backward(tape.Sum(tape.MeanRows(x)));
  for (double g : x.grad()) CHECK(g == 0.25);
  CHECK_THROWS_AS(Tape().MeanRows(M({3}, {1, 2, 3})), DimensionError);
  CHECK_THROWS_AS(Tape().GatherRows(Tensor::Zeros({2, 2}), {}), EmptyInputError);
}

TEST_CASE("cross entropy") {
  Tape tape;
  CHECK(tape.CrossEntropy(M({2}, {0, 0}), 0).item() == doctest::Approx(std::log(2.0)));
  CHECK(tape.CrossEntropy(M({2}, {10, -10}), 0).item() < 1e-4);
  CHECK(std::isfinite(tape.CrossEntropy(M({2}, {1000, -1000}), 1).item()));
  CHECK_THROWS_AS(tape.CrossEntropy(M({2}, {0, 0}), 2), LabelError);

  std::mt19937_64 rng(3);
  for (std::size_t gold = 0; gold < 4; ++gold) {
    Tensor logits = Tensor::Uniform({4}, 2.0, rng, true);
    {
      Tape t;
      t.Backward(t.CrossEntropy(logits, gold));
    }
    // softmax - onehot
    Tape t(false);
    const Tensor p = t.Softmax(logits);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(logits.grad()[i] == doctest::Approx(p[i] - (i == gold ? 1.0 : 0.0)).epsilon(1e-12));
    }
    const Tensor numeric = FiniteDifferenceGrad(
        [&](const Tensor&) {
          Tape q(false);
          return q.CrossEntropy(logits, gold).item();
        },
        logits, 1e-5);
    CHECK(RelativeError(logits.grad(), numeric.values()) < 1e-4);
  }
}

TEST_CASE("backward contract") {
  Tensor x = M({2}, {1, 2}, true);
  SUBCASE("non-scalar loss") {
    Tape tape;
    const Tensor y = tape.Scale(x, 2.0);
    CHECK_THROWS_AS(tape.Backward(y), ContractError);
  }
  SUBCASE("loss from another tape") {
    Tape a, b;
    const Tensor loss = a.Sum(x);
    CHECK_THROWS_AS(b.Backward(loss), ContractError);
  }
  SUBCASE("leaf loss") {
    Tape tape;
    CHECK_THROWS_AS(tape.Backward(Tensor::Scalar(1.0, true)), ContractError);
  }
  SUBCASE("visits the record once") {
    Tape tape;
    const Tensor loss = tape.Sum(x);
    tape.Backward(loss);
    CHECK_THROWS_AS(tape.Backward(loss), ContractError);
    CHECK(Vec(x.grad()) == std::vector<double>{1, 1});
  }
  SUBCASE("non-recording tape builds no record") {
    Tape tape(false);
    const Tensor loss = tape.Sum(tape.Mul(x, x));
    CHECK(tape.num_records() == 0);
    CHECK_FALSE(loss.requires_grad());
  }
}

TEST_CASE("gradients accumulate across uses") {
  std::mt19937_64 rng(17);
  const Tensor a = Tensor::Uniform({6}, 2.0, rng), b = Tensor::Uniform({6}, 2.0, rng);
  Tensor x = Tensor::Uniform({6}, 2.0, rng, true);
  auto grad_of = [&](bool use_a, bool use_b) {
    x.ZeroGrad();
    Tape t;
    Tensor loss;
    if (use_a) loss = t.Sum(t.Mul(x, a));
    if (use_b) loss = loss.defined() ? t.Add(loss, t.Sum(t.Mul(x, b))) : t.Sum(t.Mul(x, b));
    t.Backward(loss);
    return Vec(x.grad());
  };
  const auto ga = grad_of(true, false);
  const auto gb = grad_of(false, true);
  const auto gab = grad_of(true, true);
  for (std::size_t i = 0; i < 6; ++i) CHECK(gab[i] == ga[i] + gb[i]);
}

TEST_CASE("every differentiable op passes gradient checks across seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GradCheckOptions options;
    options.seed = seed;
    for (const GradCheckResult& r : RunGradCheckSuite(options)) {
      INFO("seed " << seed << " check " << r.name << " rel err " << r.relative_error);
      CHECK(r.passed);
    }
  }
}

TEST_CASE("finite differences") {
  Tensor x = M({3}, {1, -2, 0.5});
  const Tensor g = FiniteDifferenceGrad(
      [](const Tensor& t) { return t[0] * t[0] + 3 * t[1] + t[2] * t[2] * t[2]; }, x, 1e-5);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(g[2] == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(Vec(x.values()) == std::vector<double>{1, -2, 0.5});
  CHECK_THROWS(FiniteDifferenceGrad([](const Tensor&) { return 0.0; }, x, 0.0));
}

TEST_CASE("sgd") {
  Tensor p = Tensor::Scalar(1.0, true);
  p.mutable_grad()[0] = 2.0;
  Optimizer sgd({.kind = OptimizerKind::kSgd, .learning_rate = 0.1});
  std::vector<Tensor> params{p};
  sgd.Step(params);
  CHECK(p.item() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(p.grad()[0] == 0.0);
  CHECK(sgd.step_count() == 1);

  SUBCASE("converges on a quadratic") {
    // f(p) = (p - 3)^2, p_k = 3 - 3 * 0.8^k in closed form.
    Tensor q = Tensor::Scalar(0.0, true);
    std::vector<Tensor> qs{q};
    Optimizer opt({.kind = OptimizerKind::kSgd, .learning_rate = 0.1});
    for (int k = 0; k < 200; ++k) {
      Tape t;
      const Tensor d = t.Add(q, Tensor::Scalar(-3.0));
      t.Backward(t.Mul(d, d));
      opt.Step(qs);
    }
    CHECK(std::abs(q.item() - 3.0) < 1e-3);
    CHECK(q.item() == doctest::Approx(3.0 - 3.0 * std::pow(0.8, 200)).epsilon(1e-12));
  }
}

TEST_CASE("adam") {
  Optimizer adam({.kind = OptimizerKind::kAdam, .learning_rate = 0.01});
  Tensor p = M({3}, {1.0, -1.0, 0.0}, true);
  std::vector<Tensor> params{p};
  auto g = p.mutable_grad();
  g[0] = 4.0;
  g[1] = -0.5;
  g[2] = 1e-3;
  adam.Step(params);
  // Bias correction makes the first step exactly lr * g / (|g| + eps).
  CHECK(p[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(-1.0 + 0.01).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(-0.01).epsilon(1e-4));
  CHECK(adam.step_count() == 1);
  REQUIRE(adam.first_moments().size() == 1);
  CHECK(adam.first_moments()[0].size() == p.size());
  CHECK(adam.second_moments()[0].size() == p.size());
  for (double v : p.grad()) CHECK(v == 0.0);
  adam.Step(params);
  CHECK(adam.step_count() == 2);

  std::vector<Tensor> other{p, Tensor::Zeros({2}, true)};
  CHECK_THROWS_AS(adam.Step(other), ContractError);
  std::vector<Tensor> frozen{Tensor::Zeros({2})};
  CHECK_THROWS_AS(Optimizer({}).Step(frozen), ContractError);
}

TEST_CASE("optimizer trajectories are deterministic") {
  auto run = [](OptimizerKind kind) {
    std::mt19937_64 rng(42);
    Tensor w = Tensor::Uniform({4, 3}, 1.0, rng, true);
    const Tensor x = Tensor::Uniform({5, 4}, 1.0, rng);
    std::vector<Tensor> params{w};
    Optimizer opt({.kind = kind, .learning_rate = 0.05});
    for (int step = 0; step < 25; ++step) {
      Tape t;
      const Tensor y = t.Tanh(t.MatMul(x, w));
      t.Backward(t.Sum(t.Mul(y, y)));
      opt.Step(params);
    }
    return Vec(w.values());
  };
  for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    const auto first = run(kind);
    const auto second = run(kind);
    CHECK(std::memcmp(first.data(), second.data(), first.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("gradient clipping") {
  Tensor a = M({2}, {0, 0}, true);
  a.mutable_grad()[0] = 3;
  a.mutable_grad()[1] = 4;
  std::vector<Tensor> params{a};
  CHECK(ClipGradNorm(params, 5.0) == 5.0);
  CHECK(a.grad()[0] == 3.0);
  CHECK(ClipGradNorm(params, 1.0) == 5.0);
  CHECK(a.grad()[0] == doctest::Approx(0.6));
  CHECK(a.grad()[1] == doctest::Approx(0.8));
}

TEST_CASE("optimizer names") {
  CHECK(ParseOptimizerKind("SGD") == OptimizerKind::kSgd);
  CHECK(ParseOptimizerKind("adam") == OptimizerKind::kAdam);
  CHECK_THROWS_AS(ParseOptimizerKind("rmsprop"), std::invalid_argument);
}
