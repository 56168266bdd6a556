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

#ifndef STANCE_TENSOR_H_
#define STANCE_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace stance {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);

class Tape;

namespace detail {

struct TensorStorage {
  Shape shape;
  std::vector<double> values;
  // Empty until the tensor receives a gradient.
  std::vector<double> grad;
  bool requires_grad = false;
  // Tape that produced this tensor; null for leaves.
  const Tape* producer = nullptr;
};

}  // namespace detail

// Dense row-major array of doubles. A Tensor is a cheap handle: copies share
// the same node, which is how parameters are referenced from several places
// in a computation. Operations never write into their inputs' values.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor FromValues(Shape shape, std::vector<double> values,
                           bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);
  // Entries drawn from uniform(-bound, bound).
  static Tensor Uniform(Shape shape, double bound, std::mt19937_64& rng,
                        bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return storage_->shape; }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t size() const { return storage_->values.size(); }
  // Matrix accessors; require rank 2.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return storage_->values; }
  // Direct mutation is reserved for initialization, optimizer steps and
  // finite-difference probes.
  std::span<double> mutable_values() { return storage_->values; }
  double operator[](std::size_t i) const { return storage_->values[i]; }
  double at(std::size_t row, std::size_t col) const;
  double item() const;

  bool requires_grad() const { return storage_->requires_grad; }
  bool has_grad() const { return !storage_->grad.empty(); }
  // Zero-length span when no gradient has been accumulated yet.
  std::span<const double> grad() const { return storage_->grad; }
  std::span<double> mutable_grad() { return storage_->grad; }
  // Resets the gradient to zeros (allocating it for trainable tensors).
  void ZeroGrad();

  // Deep copy with fresh storage and no gradient.
  Tensor Clone() const;
  bool SameNode(const Tensor& other) const {
    return storage_ == other.storage_;
  }

 private:
  friend class Tape;
  explicit Tensor(std::shared_ptr<detail::TensorStorage> storage)
      : storage_(std::move(storage)) {}

  std::shared_ptr<detail::TensorStorage> storage_;
};

// Define-by-run record of differentiable operations. Every operation whose
// inputs include a trainable tensor is appended in execution order, so the
// record is topologically sorted by construction. Backward() replays it once
// in reverse, accumulating gradients additively.
class Tape {
 public:
  // A non-recording tape evaluates operations without building the backward
  // record, for inference.
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // (m x k) . (k x n) -> (m x n).
  Tensor MatMul(const Tensor& a, const Tensor& b);
  Tensor Add(const Tensor& a, const Tensor& b);
  Tensor Mul(const Tensor& a, const Tensor& b);
  Tensor Sigmoid(const Tensor& x);
  Tensor Tanh(const Tensor& x);
  Tensor Scale(const Tensor& x, double factor);
  // x is (m x n); bias has n entries and is added to every row.
  Tensor AddRowBias(const Tensor& x, const Tensor& bias);

  // Rows of the result are [a_row || b_row].
  Tensor ConcatRows(const Tensor& a, const Tensor& b);
  // Stacks equally sized vectors (or 1 x k matrices) into an (m x k) matrix.
  Tensor StackRows(std::span<const Tensor> rows);
  // Row `index` of a matrix, as a (1 x n) matrix.
  Tensor Row(const Tensor& x, std::size_t index);
  // Columns [begin, end) of a matrix.
  Tensor SliceCols(const Tensor& x, std::size_t begin, std::size_t end);
  // Rows of `table` selected by `ids` (repeats allowed).
  Tensor GatherRows(const Tensor& table, std::span<const std::size_t> ids);
  Tensor Reshape(const Tensor& x, Shape shape);

  // Softmax over all entries, max-subtracted.
  Tensor Softmax(const Tensor& x);
  // (n x d) -> [d].
  Tensor MeanRows(const Tensor& x);
  Tensor Sum(const Tensor& x);
  // -log softmax(logits)[gold], with a fused log-softmax.
  Tensor CrossEntropy(const Tensor& logits, std::size_t gold);

  void Backward(const Tensor& loss);

  std::size_t num_records() const { return records_.size(); }

 private:
  struct Record {
    std::shared_ptr<detail::TensorStorage> output;
    std::function<void()> backward;
  };

  // Creates an output tensor; marks it trainable if any input is.
  Tensor MakeOutput(Shape shape, std::vector<double> values,
                    std::initializer_list<const Tensor*> inputs);
  void Push(const Tensor& output, std::function<void()> backward);

  std::vector<Record> records_;
  bool recording_ = true;
  bool consumed_ = false;
};

}  // namespace stance

#endif  // STANCE_TENSOR_H_
