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

#ifndef STANCE_MODEL_H_
#define STANCE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stance/corpus.h"
#include "stance/tensor.h"

namespace stance {

struct ModelConfig {
  std::size_t vocab_size = 2;
  // Word embedding size. Targets are embedded with the same table, so the
  // target query has this size too.
  std::size_t embed_dim = 100;
  // LSTM hidden size per direction; the sentence vector is 2 * hidden_dim.
  std::size_t hidden_dim = 64;
  std::uint64_t seed = 7;
  // Multiplies the Glorot bound of every weight matrix.
  double init_scale = 1.0;
  // When false the encoder rows are mean-pooled instead of attended.
  bool attention = true;

  std::size_t target_dim() const { return embed_dim; }
  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Gate blocks are laid out [input | forget | candidate | output] along the
// 4h axis.
struct LstmParams {
  Tensor input_weights;      // d x 4h
  Tensor recurrent_weights;  // h x 4h
  Tensor bias;               // [4h]
};

// Parameters of one phase of the cascade.
struct PhaseModel {
  ModelConfig config;
  Tensor embeddings;  // |V| x d
  LstmParams forward_lstm;
  LstmParams backward_lstm;
  Tensor attention_weights;   // 2d x 1
  Tensor attention_bias;      // [1]
  Tensor classifier_weights;  // 2h x 2
  Tensor classifier_bias;     // [2]

  // Deterministic in config.seed: Glorot-uniform weights, zero biases except
  // the LSTM forget-gate slice, which starts at 1.
  static PhaseModel Init(const ModelConfig& config);

  // Stable order, matching ParameterNames().
  std::vector<Tensor> Parameters() const;
  static std::vector<std::string> ParameterNames();
  // Expected shape of each parameter under `config`, same order.
  static std::vector<Shape> ParameterShapes(const ModelConfig& config);

  // Deep copy; the clone shares no storage with this model.
  PhaseModel Clone() const;
};

// Mean of the target words' embedding rows, as a [d] vector. The result does
// not depend on the order of `target_ids`, bit for bit.
Tensor TargetQuery(Tape& tape, const Tensor& embeddings,
                   std::span<const TokenId> target_ids);

// Appends `query` to every row: row t becomes [z_t || query].
Tensor Augment(Tape& tape, const Tensor& word_embeds, const Tensor& query);

// One direction over the rows of `inputs` with zero initial state. Row t of
// the result is the hidden state after consuming input t, for either
// direction.
Tensor LstmEncode(Tape& tape, const Tensor& inputs, const LstmParams& params,
                  bool reverse);

// (m x d) -> (m x 2h); row t is [forward_t || backward_t].
Tensor BiLstmEncode(Tape& tape, const Tensor& word_embeds,
                    const LstmParams& forward, const LstmParams& backward);

// softmax_t(augmented_t . W_a + b_a), a [m] vector.
Tensor AttentionWeights(Tape& tape, const Tensor& augmented, const Tensor& weights,
                        const Tensor& bias);

// sum_t weights_t * encoded_t, a [2h] vector.
Tensor Attend(Tape& tape, const Tensor& encoded, const Tensor& weights);

Tensor ClassLogits(Tape& tape, const Tensor& sentence, const Tensor& weights,
                   const Tensor& bias);
// softmax(ClassLogits(...)).
Tensor Classify(Tape& tape, const Tensor& sentence, const Tensor& weights,
                const Tensor& bias);

// Lowest index wins ties.
std::size_t Argmax(std::span<const double> values);

struct ForwardResult {
  Tensor logits;     // [2]
  Tensor probs;      // [2]
  Tensor attention;  // [m]; uniform when attention is disabled
};

ForwardResult Forward(Tape& tape, const PhaseModel& model,
                      std::span<const TokenId> tokens,
                      std::span<const TokenId> target_tokens);

// Loads `token v1 ... vd` lines into the rows of matching vocabulary
// entries. A leading `count dim` header line is skipped. Returns the number
// of rows overwritten.
std::size_t LoadPretrainedEmbeddings(PhaseModel& model, const Vocab& vocab,
                                     const std::filesystem::path& path);

// Binary checkpoint holding the config, the vocabulary and every parameter
// with its shape. Values are stored as raw IEEE-754 bits, so a round trip is
// bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void SavePhaseModel(const std::filesystem::path& path, const PhaseModel& model,
                    const Vocab& vocab);

struct LoadedPhaseModel {
  PhaseModel model;
  Vocab vocab;
};

// Throws VersionMismatchError, TruncatedFileError or ShapeMismatchError
// (all LoadError) on a bad file.
LoadedPhaseModel LoadPhaseModel(const std::filesystem::path& path);

}  // namespace stance

#endif  // STANCE_MODEL_H_
