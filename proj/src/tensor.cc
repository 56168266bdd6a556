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

#include "stance/tensor.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "stance/errors.h"

namespace stance {
namespace {

using detail::TensorStorage;
using StoragePtr = std::shared_ptr<TensorStorage>;

std::size_t NumElements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void CheckShape(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("zero dimension in shape " + ShapeString(shape));
  }
}

// Returns the gradient buffer of `s`, allocating zeros on first use.
std::vector<double>& GradOf(TensorStorage& s) {
  if (s.grad.empty()) s.grad.assign(s.values.size(), 0.0);
  return s.grad;
}

void RequireMatrix(const Tensor& x, const char* op) {
  if (x.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got shape " +
                         ShapeString(x.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeString(a.shape()) + " vs " + ShapeString(b.shape()));
  }
}

void RequireFinite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite input");
    }
  }
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  const std::size_t n = NumElements(shape);
  return FromValues(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::FromValues(Shape shape, std::vector<double> values,
                          bool requires_grad) {
  CheckShape(shape);
  if (values.size() != NumElements(shape)) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + ShapeString(shape));
  }
  auto s = std::make_shared<TensorStorage>();
  s->shape = std::move(shape);
  s->values = std::move(values);
  s->requires_grad = requires_grad;
  if (requires_grad) s->grad.assign(s->values.size(), 0.0);
  return Tensor(std::move(s));
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return FromValues({1}, {value}, requires_grad);
}

Tensor Tensor::Uniform(Shape shape, double bound, std::mt19937_64& rng,
                       bool requires_grad) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(NumElements(shape));
  for (double& v : values) v = dist(rng);
  return FromValues(std::move(shape), std::move(values), requires_grad);
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on non-matrix " + ShapeString(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on non-matrix " + ShapeString(shape()));
  return shape()[1];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  return storage_->values[row * cols() + col];
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + ShapeString(shape()));
  }
  return storage_->values[0];
}

void Tensor::ZeroGrad() {
  if (storage_->requires_grad || has_grad()) {
    storage_->grad.assign(storage_->values.size(), 0.0);
  }
}

Tensor Tensor::Clone() const {
  return FromValues(shape(), storage_->values, requires_grad());
}

// ---------------------------------------------------------------------------
// Tape plumbing

Tensor Tape::MakeOutput(Shape shape, std::vector<double> values,
                        std::initializer_list<const Tensor*> inputs) {
  const bool trainable =
      recording_ && std::any_of(inputs.begin(), inputs.end(),
                                [](const Tensor* t) { return t->requires_grad(); });
  auto s = std::make_shared<TensorStorage>();
  s->shape = std::move(shape);
  s->values = std::move(values);
  s->requires_grad = trainable;
  s->producer = this;
  return Tensor(std::move(s));
}

void Tape::Push(const Tensor& output, std::function<void()> backward) {
  if (!output.requires_grad()) return;
  if (consumed_) throw ContractError("tape already ran backward");
  records_.push_back({output.storage_, std::move(backward)});
}

void Tape::Backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        (loss.defined() ? ShapeString(loss.shape()) : "<undefined>"));
  }
  if (loss.storage_->producer != this) {
    throw ContractError("loss was not produced on this tape");
  }
  if (consumed_) throw ContractError("tape already ran backward");
  consumed_ = true;
  if (!loss.requires_grad()) return;

  GradOf(*loss.storage_)[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->output->grad.empty()) continue;  // not on the path to the loss
    it->backward();
  }
}

// ---------------------------------------------------------------------------
// Operations

Tensor Tape::MatMul(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "matmul");
  RequireMatrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " + ShapeString(a.shape()) +
                         " . " + ShapeString(b.shape()));
  }
  std::vector<double> c(m * n, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  Tensor out = MakeOutput({m, n}, std::move(c), {&a, &b});
  Push(out, [as = a.storage_, bs = b.storage_, os = out.storage_, m, k, n] {
    const double* dc = os->grad.data();
    if (as->requires_grad) {
      // dA = dC . B^T
      double* da = GradOf(*as).data();
      const double* bv = bs->values.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += dc[i * n + j] * bv[p * n + j];
          da[i * k + p] += acc;
        }
      }
    }
    if (bs->requires_grad) {
      // dB = A^T . dC
      double* db = GradOf(*bs).data();
      const double* av = as->values.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) db[p * n + j] += aip * dc[i * n + j];
        }
      }
    }
  });
  return out;
}

Tensor Tape::Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "add");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  Tensor out = MakeOutput(a.shape(), std::move(v), {&a, &b});
  Push(out, [as = a.storage_, bs = b.storage_, os = out.storage_] {
    for (auto* s : {as.get(), bs.get()}) {
      if (!s->requires_grad) continue;
      auto& g = GradOf(*s);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += os->grad[i];
    }
  });
  return out;
}

Tensor Tape::Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  Tensor out = MakeOutput(a.shape(), std::move(v), {&a, &b});
  Push(out, [as = a.storage_, bs = b.storage_, os = out.storage_] {
    if (as->requires_grad) {
      auto& g = GradOf(*as);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += os->grad[i] * bs->values[i];
    }
    if (bs->requires_grad) {
      auto& g = GradOf(*bs);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += os->grad[i] * as->values[i];
    }
  });
  return out;
}

Tensor Tape::Sigmoid(const Tensor& x) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = StableSigmoid(x[i]);
  Tensor out = MakeOutput(x.shape(), std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_] {
    auto& g = GradOf(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = os->values[i];
      g[i] += os->grad[i] * y * (1.0 - y);
    }
  });
  return out;
}

Tensor Tape::Tanh(const Tensor& x) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(x[i]);
  Tensor out = MakeOutput(x.shape(), std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_] {
    auto& g = GradOf(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = os->values[i];
      g[i] += os->grad[i] * (1.0 - y * y);
    }
  });
  return out;
}

Tensor Tape::Scale(const Tensor& x, double factor) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] * factor;
  Tensor out = MakeOutput(x.shape(), std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_, factor] {
    auto& g = GradOf(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += os->grad[i] * factor;
  });
  return out;
}

Tensor Tape::AddRowBias(const Tensor& x, const Tensor& bias) {
  RequireMatrix(x, "add_row_bias");
  const std::size_t m = x.rows(), n = x.cols();
  if (bias.size() != n) {
    throw DimensionError("add_row_bias: bias " + ShapeString(bias.shape()) +
                         " does not fit rows of " + ShapeString(x.shape()));
  }
  std::vector<double> v(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] += bias[j];
  Tensor out = MakeOutput(x.shape(), std::move(v), {&x, &bias});
  Push(out, [xs = x.storage_, bs = bias.storage_, os = out.storage_, m, n] {
    if (xs->requires_grad) {
      auto& g = GradOf(*xs);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += os->grad[i];
    }
    if (bs->requires_grad) {
      auto& g = GradOf(*bs);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += os->grad[i * n + j];
    }
  });
  return out;
}

Tensor Tape::ConcatRows(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "concat_rows");
  RequireMatrix(b, "concat_rows");
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_rows: row counts differ, " + ShapeString(a.shape()) +
                         " vs " + ShapeString(b.shape()));
  }
  const std::size_t m = a.rows(), p = a.cols(), q = b.cols();
  std::vector<double> v(m * (p + q));
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(a.values().begin() + i * p, p, v.begin() + i * (p + q));
    std::copy_n(b.values().begin() + i * q, q, v.begin() + i * (p + q) + p);
  }
  Tensor out = MakeOutput({m, p + q}, std::move(v), {&a, &b});
  Push(out, [as = a.storage_, bs = b.storage_, os = out.storage_, m, p, q] {
    if (as->requires_grad) {
      auto& g = GradOf(*as);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) g[i * p + j] += os->grad[i * (p + q) + j];
    }
    if (bs->requires_grad) {
      auto& g = GradOf(*bs);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < q; ++j) g[i * q + j] += os->grad[i * (p + q) + p + j];
    }
  });
  return out;
}

Tensor Tape::StackRows(std::span<const Tensor> rows) {
  if (rows.empty()) throw EmptyInputError("stack_rows: no rows");
  const std::size_t k = rows[0].size();
  std::vector<double> v;
  v.reserve(rows.size() * k);
  bool trainable = false;
  for (const Tensor& r : rows) {
    if (r.size() != k || r.rank() > 2 || (r.rank() == 2 && r.rows() != 1)) {
      throw DimensionError("stack_rows: incompatible row " + ShapeString(r.shape()));
    }
    v.insert(v.end(), r.values().begin(), r.values().end());
    trainable = trainable || r.requires_grad();
  }
  Tensor out = MakeOutput({rows.size(), k}, std::move(v), {});
  out.storage_->requires_grad = recording_ && trainable;
  std::vector<StoragePtr> inputs;
  inputs.reserve(rows.size());
  for (const Tensor& r : rows) inputs.push_back(r.storage_);
  Push(out, [inputs = std::move(inputs), os = out.storage_, k] {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!inputs[i]->requires_grad) continue;
      auto& g = GradOf(*inputs[i]);
      for (std::size_t j = 0; j < k; ++j) g[j] += os->grad[i * k + j];
    }
  });
  return out;
}

Tensor Tape::Row(const Tensor& x, std::size_t index) {
  RequireMatrix(x, "row");
  if (index >= x.rows()) {
    throw DimensionError("row: index " + std::to_string(index) + " out of range for " +
                         ShapeString(x.shape()));
  }
  const std::size_t n = x.cols();
  std::vector<double> v(x.values().begin() + index * n, x.values().begin() + (index + 1) * n);
  Tensor out = MakeOutput({1, n}, std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_, index, n] {
    auto& g = GradOf(*xs);
    for (std::size_t j = 0; j < n; ++j) g[index * n + j] += os->grad[j];
  });
  return out;
}

Tensor Tape::SliceCols(const Tensor& x, std::size_t begin, std::size_t end) {
  RequireMatrix(x, "slice_cols");
  if (begin >= end || end > x.cols()) {
    throw DimensionError("slice_cols: bad range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") for " + ShapeString(x.shape()));
  }
  const std::size_t m = x.rows(), n = x.cols(), w = end - begin;
  std::vector<double> v(m * w);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(x.values().begin() + i * n + begin, w, v.begin() + i * w);
  Tensor out = MakeOutput({m, w}, std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_, m, n, w, begin] {
    auto& g = GradOf(*xs);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += os->grad[i * w + j];
  });
  return out;
}

Tensor Tape::GatherRows(const Tensor& table, std::span<const std::size_t> ids) {
  RequireMatrix(table, "gather_rows");
  if (ids.empty()) throw EmptyInputError("gather_rows: no ids");
  const std::size_t n = table.cols();
  std::vector<double> v(ids.size() * n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.rows()) {
      throw DimensionError("gather_rows: id " + std::to_string(ids[i]) +
                           " out of range for " + ShapeString(table.shape()));
    }
    std::copy_n(table.values().begin() + ids[i] * n, n, v.begin() + i * n);
  }
  Tensor out = MakeOutput({ids.size(), n}, std::move(v), {&table});
  Push(out, [ts = table.storage_, os = out.storage_,
             ids = std::vector<std::size_t>(ids.begin(), ids.end()), n] {
    auto& g = GradOf(*ts);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) g[ids[i] * n + j] += os->grad[i * n + j];
  });
  return out;
}

Tensor Tape::Reshape(const Tensor& x, Shape shape) {
  CheckShape(shape);
  if (NumElements(shape) != x.size()) {
    throw DimensionError("reshape: " + ShapeString(x.shape()) + " -> " + ShapeString(shape));
  }
  std::vector<double> v(x.values().begin(), x.values().end());
  Tensor out = MakeOutput(std::move(shape), std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_] {
    auto& g = GradOf(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += os->grad[i];
  });
  return out;
}

Tensor Tape::Softmax(const Tensor& x) {
  RequireFinite(x.values(), "softmax");
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  std::vector<double> v(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::exp(x[i] - mx);
    total += v[i];
  }
  for (double& e : v) e /= total;
  Tensor out = MakeOutput(x.shape(), std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_] {
    // dx_i = y_i (dy_i - sum_j dy_j y_j)
    const auto& y = os->values;
    const auto& dy = os->grad;
    double dot = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) dot += dy[j] * y[j];
    auto& g = GradOf(*xs);
    for (std::size_t i = 0; i < y.size(); ++i) g[i] += y[i] * (dy[i] - dot);
  });
  return out;
}

Tensor Tape::MeanRows(const Tensor& x) {
  RequireMatrix(x, "mean_rows");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) v[j] += x.at(i, j);
  for (double& e : v) e /= static_cast<double>(m);
  Tensor out = MakeOutput({n}, std::move(v), {&x});
  Push(out, [xs = x.storage_, os = out.storage_, m, n] {
    auto& g = GradOf(*xs);
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += os->grad[j] * inv;
  });
  return out;
}

Tensor Tape::Sum(const Tensor& x) {
  double total = 0.0;
  for (double e : x.values()) total += e;
  Tensor out = MakeOutput({1}, {total}, {&x});
  Push(out, [xs = x.storage_, os = out.storage_] {
    auto& g = GradOf(*xs);
    for (double& e : g) e += os->grad[0];
  });
  return out;
}

Tensor Tape::CrossEntropy(const Tensor& logits, std::size_t gold) {
  if (gold >= logits.size()) {
    throw LabelError("cross_entropy: gold class " + std::to_string(gold) +
                     " out of range for " + std::to_string(logits.size()) + " classes");
  }
  RequireFinite(logits.values(), "cross_entropy");
  const double mx = *std::max_element(logits.values().begin(), logits.values().end());
  double total = 0.0;
  for (double z : logits.values()) total += std::exp(z - mx);
  const double log_norm = mx + std::log(total);
  Tensor out = MakeOutput({1}, {log_norm - logits[gold]}, {&logits});
  Push(out, [ls = logits.storage_, os = out.storage_, gold, log_norm] {
    auto& g = GradOf(*ls);
    const double dy = os->grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double p = std::exp(ls->values[i] - log_norm);
      g[i] += dy * (p - (i == gold ? 1.0 : 0.0));
    }
  });
  return out;
}

}  // namespace stance
