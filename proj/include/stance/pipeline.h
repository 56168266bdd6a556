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

#ifndef STANCE_PIPELINE_H_
#define STANCE_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stance/corpus.h"
#include "stance/model.h"
#include "stance/optimizer.h"
#include "stance/textprep.h"

namespace stance {

// The two binary tasks of the cascade.
//   kSubjectivity: class 0 = SUBJECTIVE, class 1 = NEUTRAL
//   kPolarity:     class 0 = FAVOR,      class 1 = AGAINST
enum class Phase { kSubjectivity, kPolarity };

// Gold class index of `example` for `phase`. Throws LabelError for a NONE
// example under kPolarity.
std::size_t PhaseLabel(const EncodedExample& example, Phase phase);

struct EpochStats {
  Phase phase = Phase::kSubjectivity;
  int epoch = 0;           // 1-based
  double mean_loss = 0.0;  // over the epoch's mini-batches, before each update
};

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 0.005;
  int epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 7;
  bool clean = false;
  bool attention = true;
  bool clip_gradients = false;
  double clip_norm = 5.0;
  // Fraction of each training set held out (seeded) and scored after training.
  double holdout = 0.0;
  bool per_target = true;

  std::size_t embed_dim = 100;
  std::size_t hidden_dim = 64;
  int min_count = 1;
  std::filesystem::path pretrained_embeddings;
  // Per-target trainings run on up to this many threads.
  unsigned threads = 1;

  // Progress lines go here when set.
  std::ostream* log = nullptr;
  // Called after every epoch; returning false stops that phase early.
  std::function<bool(const EpochStats&, const PhaseModel&)> on_epoch;

  void Validate() const;
};

struct PhaseTrainResult {
  PhaseModel model;
  double initial_loss = 0.0;  // mean loss over the training set before training
  double final_loss = 0.0;    // and after
  int epochs_run = 0;
  std::vector<double> epoch_losses;
};

// Mean cross-entropy of `model` over `examples` for `phase`, recorded on `tape`.
Tensor PhaseLoss(Tape& tape, const PhaseModel& model,
                 std::span<const EncodedExample> examples, Phase phase);

// Same value without recording gradients.
double MeanPhaseLoss(const PhaseModel& model, std::span<const EncodedExample> examples,
                     Phase phase);

ModelConfig PhaseModelConfig(const TrainConfig& config, std::size_t vocab_size, Phase phase);

// Subjectivity over all examples.
PhaseTrainResult TrainPhase1(std::span<const EncodedExample> train, const Vocab& vocab,
                             const TrainConfig& config);
// Polarity over the FAVOR/AGAINST examples only; NONE examples are dropped.
// Throws DegenerateDataError unless both FAVOR and AGAINST are present.
PhaseTrainResult TrainPhase2(std::span<const EncodedExample> train, const Vocab& vocab,
                             const TrainConfig& config);

struct TwoPhaseModel {
  PhaseModel phase1;
  PhaseModel phase2;
};

struct Prediction {
  Stance stance = Stance::kNone;
  std::array<double, 2> phase1_probs{};
  // Unset when phase 1 routed the example to NONE.
  std::optional<std::array<double, 2>> phase2_probs;
  std::vector<double> phase1_attention;
};

// NONE iff phase 1 picks NEUTRAL; otherwise phase 2 chooses FAVOR/AGAINST.
// Phase 2 is not evaluated for NONE-routed examples.
Prediction PredictDetailed(const EncodedExample& example, const TwoPhaseModel& model);
Stance Predict(const EncodedExample& example, const TwoPhaseModel& model);

inline constexpr std::string_view kPooledKey = "*";

// Trained cascade(s) plus everything needed to encode raw examples.
struct StanceSystem {
  Vocab vocab;
  TextPrep prep;
  TrainConfig config;
  // One entry per target, or a single kPooledKey entry.
  std::map<std::string, TwoPhaseModel> models;

  bool pooled() const { return models.count(std::string(kPooledKey)) > 0; }
  // Throws UnknownTargetError for a target without a model.
  const TwoPhaseModel& ModelFor(const std::string& target) const;
  Stance Predict(const Example& example) const;
  std::vector<Stance> PredictAll(std::span<const Example> examples) const;
};

struct TrainSummary {
  std::string key;
  PhaseTrainResult phase1;
  PhaseTrainResult phase2;
  std::size_t holdout_size = 0;
  double holdout_accuracy = 0.0;
};

// Builds the shared vocabulary from `train` and fits one cascade per target
// (or a pooled one). The phases are trained separately; neither loss reaches
// the other phase's parameters.
StanceSystem TrainAll(std::span<const Example> train, const TrainConfig& config,
                      TextPrep prep, std::vector<TrainSummary>* summaries = nullptr);

// Checkpoint directory:
//   MANIFEST                  format version, mode, vocab hash, cleaning flag
//   targets.tsv               target <TAB> subdirectory
//   slang.tsv, stopwords.txt  cleaning resources (when cleaning is on)
//   <subdir>/phase1.ckpt, <subdir>/phase2.ckpt, <subdir>/manifest.txt
inline constexpr int kCheckpointDirVersion = 1;

void SaveSystem(const StanceSystem& system, const std::filesystem::path& dir);
StanceSystem LoadSystem(const std::filesystem::path& dir);

}  // namespace stance

#endif  // STANCE_PIPELINE_H_
