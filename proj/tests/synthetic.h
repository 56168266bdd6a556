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

// Small generated corpora shared by the tests.

#ifndef STANCE_TESTS_SYNTHETIC_H_
#define STANCE_TESTS_SYNTHETIC_H_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "stance/corpus.h"
#include "stance/model.h"
#include "stance/pipeline.h"

namespace stance::testing {

// 16 examples: 4 FAVOR and 4 AGAINST with their own cue words, 8 NONE.
inline std::vector<Example> OverfitCorpus(const std::string& target = "Atheism") {
  const std::vector<std::string> favor{
      "freedom reason science wins today", "science and reason bring freedom",
      "reason over dogma freedom always", "i love science reason"};
  const std::vector<std::string> against{
      "pray god faith saves us", "god bless faith and prayer",
      "faith in god is eternal", "pray daily god faith"};
  const std::vector<std::string> none{
      "the weather is nice today", "watching football with friends",
      "lunch was tasty again", "traffic on the highway again",
      "new phone arrived today", "coffee tastes good now",
      "the concert was loud", "monday meetings all day"};
  std::vector<Example> out;
  int id = 1;
  for (const auto& t : favor) out.push_back({std::to_string(id++), target, t, Stance::kFavor});
  for (const auto& t : against) out.push_back({std::to_string(id++), target, t, Stance::kAgainst});
  for (const auto& t : none) out.push_back({std::to_string(id++), target, t, Stance::kNone});
  return out;
}

// Random tweets over a small word list; stances drawn uniformly.
inline std::vector<Example> RandomCorpus(std::size_t n, std::uint64_t seed,
                                         const std::vector<std::string>& targets) {
  static const std::vector<std::string> words{
      "god",  "faith", "pray", "reason", "science", "vote", "hillary", "climate",
      "women", "rights", "choice", "life", "#freedom", "#semst", "lol", "the",
      "is",   "a",     "we",   "must",   "never",   "always", "good", "bad"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> word(0, words.size() - 1), len(1, 9),
      stance(0, 2), target(0, targets.size() - 1);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string tweet;
    const std::size_t m = len(rng);
    for (std::size_t k = 0; k < m; ++k) tweet += (k ? " " : "") + words[word(rng)];
    out.push_back({std::to_string(i + 1), targets[target(rng)], tweet,
                   static_cast<Stance>(stance(rng))});
  }
  // Every target needs both FAVOR and AGAINST to train.
  for (std::size_t t = 0; t < targets.size(); ++t) {
    out.push_back({"f" + std::to_string(t), targets[t], "science reason", Stance::kFavor});
    out.push_back({"a" + std::to_string(t), targets[t], "god faith", Stance::kAgainst});
  }
  return out;
}

struct OverfitResult {
  TwoPhaseModel model;
  int phase1_epochs = 0;
  int phase2_epochs = 0;
  double accuracy = 0.0;  // three-class, on the training set
};

inline double PhaseAccuracy(const PhaseModel& model, std::span<const EncodedExample> data,
                            Phase phase) {
  std::size_t hits = 0, n = 0;
  for (const EncodedExample& ex : data) {
    if (phase == Phase::kPolarity && ex.stance == Stance::kNone) continue;
    Tape tape(false);
    const ForwardResult r = Forward(tape, model, ex.tokens, ex.target_tokens);
    hits += Argmax(r.probs.values()) == PhaseLabel(ex, phase);
    ++n;
  }
  return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
}

// Trains both phases on the 16-example corpus, stopping each phase as soon
// as it fits its training labels.
inline OverfitResult RunOverfit(TrainConfig config) {
  const std::vector<Example> corpus = OverfitCorpus();
  const TextPrep prep;
  const Vocab vocab = BuildVocab(corpus, prep);
  const std::vector<EncodedExample> data = EncodeAll(corpus, vocab, prep);
  auto stop_when_fit = [&](Phase phase) {
    return [&data, phase](const EpochStats&, const PhaseModel& m) {
      return PhaseAccuracy(m, data, phase) < 1.0;
    };
  };
  OverfitResult out;
  config.on_epoch = stop_when_fit(Phase::kSubjectivity);
  PhaseTrainResult p1 = TrainPhase1(data, vocab, config);
  config.on_epoch = stop_when_fit(Phase::kPolarity);
  PhaseTrainResult p2 = TrainPhase2(data, vocab, config);
  out.phase1_epochs = p1.epochs_run;
  out.phase2_epochs = p2.epochs_run;
  out.model = {std::move(p1.model), std::move(p2.model)};
  std::size_t hits = 0;
  for (const EncodedExample& ex : data) hits += Predict(ex, out.model) == ex.stance;
  out.accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  return out;
}

inline TrainConfig OverfitConfig() {
  TrainConfig c;
  c.optimizer = OptimizerKind::kAdam;
  c.learning_rate = 0.01;
  c.epochs = 500;
  c.seed = 7;
  return c;
}

}  // namespace stance::testing

#endif  // STANCE_TESTS_SYNTHETIC_H_
