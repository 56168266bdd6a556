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

#include "stance/pipeline.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "stance/errors.h"

namespace stance {
namespace {

constexpr std::size_t kSubjective = 0, kNeutral = 1;
constexpr std::size_t kFavorClass = 0, kAgainstClass = 1;

std::string_view PhaseName(Phase phase) {
  return phase == Phase::kSubjectivity ? "phase1" : "phase2";
}

std::uint64_t PhaseSeed(std::uint64_t seed, Phase phase) {
  return phase == Phase::kSubjectivity ? seed : seed + 1;
}

Tensor BatchLoss(Tape& tape, const PhaseModel& model,
                 std::span<const EncodedExample> examples,
                 std::span<const std::size_t> indices, Phase phase) {
  if (indices.empty()) throw EmptyInputError("loss over an empty batch");
  Tensor total;
  for (std::size_t i : indices) {
    const EncodedExample& ex = examples[i];
    const ForwardResult out = Forward(tape, model, ex.tokens, ex.target_tokens);
    const Tensor loss = tape.CrossEntropy(out.logits, PhaseLabel(ex, phase));
    total = total.defined() ? tape.Add(total, loss) : loss;
  }
  return tape.Scale(total, 1.0 / static_cast<double>(indices.size()));
}

PhaseTrainResult TrainPhase(std::vector<EncodedExample> data, const Vocab& vocab,
                            const TrainConfig& config, Phase phase) {
  config.Validate();
  if (data.empty()) {
    throw DegenerateDataError(std::string(PhaseName(phase)) + ": no training examples");
  }
  PhaseTrainResult result;
  result.model = PhaseModel::Init(PhaseModelConfig(config, vocab.size(), phase));
  PhaseModel& model = result.model;
  if (!config.pretrained_embeddings.empty()) {
    const std::size_t n = LoadPretrainedEmbeddings(model, vocab, config.pretrained_embeddings);
    if (config.log) {
      *config.log << PhaseName(phase) << ": loaded " << n << " pretrained vectors\n";
    }
  }
  std::vector<Tensor> params = model.Parameters();
  Optimizer optimizer({.kind = config.optimizer, .learning_rate = config.learning_rate});

  result.initial_loss = MeanPhaseLoss(model, data, phase);

  std::mt19937_64 rng(PhaseSeed(config.seed, phase) ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      Tape tape;
      const Tensor loss = BatchLoss(tape, model, data, batch, phase);
      tape.Backward(loss);
      if (config.clip_gradients) ClipGradNorm(params, config.clip_norm);
      optimizer.Step(params);
      loss_sum += loss.item();
      ++batches;
    }
    const EpochStats stats{phase, epoch, loss_sum / static_cast<double>(batches)};
    result.epoch_losses.push_back(stats.mean_loss);
    result.epochs_run = epoch;
    if (config.log) {
      *config.log << PhaseName(phase) << " epoch " << epoch << "/" << config.epochs
                  << " loss " << std::fixed << std::setprecision(5) << stats.mean_loss
                  << std::defaultfloat << "\n";
    }
    if (config.on_epoch && !config.on_epoch(stats, model)) break;
  }
  result.final_loss = MeanPhaseLoss(model, data, phase);
  if (config.log && !(result.final_loss < result.initial_loss)) {
    *config.log << PhaseName(phase) << ": warning: training loss did not decrease ("
                << result.initial_loss << " -> " << result.final_loss << ")\n";
  }
  return result;
}

std::array<double, 2> ToArray(const Tensor& probs) { return {probs[0], probs[1]}; }

bool HasBothPolarities(std::span<const Example> examples) {
  bool favor = false, against = false;
  for (const Example& ex : examples) {
    favor = favor || ex.stance == Stance::kFavor;
    against = against || ex.stance == Stance::kAgainst;
  }
  return favor && against;
}

TrainSummary TrainGroup(const std::string& key, std::span<const Example> examples,
                        const Vocab& vocab, const TextPrep& prep, const TrainConfig& config) {
  TrainSummary summary;
  summary.key = key;
  auto [train, held] = SplitHoldout(examples, config.holdout, config.seed);
  if (!HasBothPolarities(train)) {
    throw DegenerateDataError("target '" + key +
                              "' needs both FAVOR and AGAINST training examples");
  }
  const auto encoded = EncodeAll(train, vocab, prep);
  if (config.log) *config.log << "[" << key << "] " << encoded.size() << " examples\n";
  summary.phase1 = TrainPhase1(encoded, vocab, config);
  summary.phase2 = TrainPhase2(encoded, vocab, config);

  summary.holdout_size = held.size();
  if (!held.empty()) {
    const TwoPhaseModel cascade{summary.phase1.model, summary.phase2.model};
    std::size_t correct = 0;
    for (const auto& ex : EncodeAll(held, vocab, prep)) {
      correct += Predict(ex, cascade) == ex.stance ? 1 : 0;
    }
    summary.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(held.size());
    if (config.log) {
      *config.log << "[" << key << "] holdout accuracy " << summary.holdout_accuracy
                  << " on " << held.size() << " examples\n";
    }
  }
  return summary;
}

// "Hillary Clinton" -> "01_hillary_clinton".
std::string SubdirName(std::size_t index, const std::string& key) {
  std::ostringstream name;
  name << std::setw(2) << std::setfill('0') << index << '_';
  std::string slug;
  for (unsigned char c : key) {
    slug += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  }
  name << (key == kPooledKey ? "pooled" : slug);
  return name.str();
}

std::string HashHex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::map<std::string, std::string> ReadKeyValues(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("missing " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& Require(const std::map<std::string, std::string>& kv,
                           const std::string& key, const std::filesystem::path& path) {
  auto it = kv.find(key);
  if (it == kv.end()) throw LoadError(path.string() + ": missing '" + key + "'");
  return it->second;
}

void WriteFile(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
}

}  // namespace

std::size_t PhaseLabel(const EncodedExample& example, Phase phase) {
  if (phase == Phase::kSubjectivity) {
    return example.phase1 == Phase1Label::kSubjective ? kSubjective : kNeutral;
  }
  switch (example.stance) {
    case Stance::kFavor: return kFavorClass;
    case Stance::kAgainst: return kAgainstClass;
    case Stance::kNone: break;
  }
  throw LabelError("NONE examples have no polarity label");
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (holdout < 0.0 || holdout >= 1.0) throw std::invalid_argument("holdout must be in [0, 1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  if (embed_dim == 0 || hidden_dim == 0) throw std::invalid_argument("model sizes must be positive");
}

Tensor PhaseLoss(Tape& tape, const PhaseModel& model,
                 std::span<const EncodedExample> examples, Phase phase) {
  std::vector<std::size_t> all(examples.size());
  std::iota(all.begin(), all.end(), 0);
  return BatchLoss(tape, model, examples, all, phase);
}

double MeanPhaseLoss(const PhaseModel& model, std::span<const EncodedExample> examples,
                     Phase phase) {
  Tape tape(/*recording=*/false);
  return PhaseLoss(tape, model, examples, phase).item();
}

ModelConfig PhaseModelConfig(const TrainConfig& config, std::size_t vocab_size, Phase phase) {
  ModelConfig mc;
  mc.vocab_size = vocab_size;
  mc.embed_dim = config.embed_dim;
  mc.hidden_dim = config.hidden_dim;
  mc.seed = PhaseSeed(config.seed, phase);
  mc.attention = config.attention;
  return mc;
}

PhaseTrainResult TrainPhase1(std::span<const EncodedExample> train, const Vocab& vocab,
                             const TrainConfig& config) {
  return TrainPhase({train.begin(), train.end()}, vocab, config, Phase::kSubjectivity);
}

PhaseTrainResult TrainPhase2(std::span<const EncodedExample> train, const Vocab& vocab,
                             const TrainConfig& config) {
  std::vector<EncodedExample> subjective;
  std::copy_if(train.begin(), train.end(), std::back_inserter(subjective),
               [](const EncodedExample& ex) { return ex.stance != Stance::kNone; });
  const bool favor = std::any_of(subjective.begin(), subjective.end(),
                                 [](const auto& ex) { return ex.stance == Stance::kFavor; });
  const bool against = std::any_of(subjective.begin(), subjective.end(),
                                   [](const auto& ex) { return ex.stance == Stance::kAgainst; });
  if (!favor || !against) {
    throw DegenerateDataError("phase2 needs both FAVOR and AGAINST examples");
  }
  return TrainPhase(std::move(subjective), vocab, config, Phase::kPolarity);
}

Prediction PredictDetailed(const EncodedExample& example, const TwoPhaseModel& model) {
  Prediction p;
  {
    Tape tape(/*recording=*/false);
    const ForwardResult out =
        Forward(tape, model.phase1, example.tokens, example.target_tokens);
    p.phase1_probs = ToArray(out.probs);
    p.phase1_attention.assign(out.attention.values().begin(), out.attention.values().end());
  }
  if (Argmax(p.phase1_probs) == kNeutral) {
    p.stance = Stance::kNone;
    return p;
  }
  Tape tape(/*recording=*/false);
  const ForwardResult out = Forward(tape, model.phase2, example.tokens, example.target_tokens);
  p.phase2_probs = ToArray(out.probs);
  p.stance = Argmax(*p.phase2_probs) == kFavorClass ? Stance::kFavor : Stance::kAgainst;
  return p;
}

Stance Predict(const EncodedExample& example, const TwoPhaseModel& model) {
  return PredictDetailed(example, model).stance;
}

const TwoPhaseModel& StanceSystem::ModelFor(const std::string& target) const {
  if (auto it = models.find(std::string(kPooledKey)); it != models.end()) return it->second;
  auto it = models.find(target);
  if (it == models.end()) {
    std::string valid;
    for (const auto& [key, unused] : models) valid += (valid.empty() ? "'" : ", '") + key + "'";
    throw UnknownTargetError("no model for target '" + target + "'; valid targets: " + valid);
  }
  return it->second;
}

Stance StanceSystem::Predict(const Example& example) const {
  return stance::Predict(Encode(example, vocab, prep), ModelFor(example.target));
}

std::vector<Stance> StanceSystem::PredictAll(std::span<const Example> examples) const {
  std::vector<Stance> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) out.push_back(Predict(ex));
  return out;
}

StanceSystem TrainAll(std::span<const Example> train, const TrainConfig& config,
                      TextPrep prep, std::vector<TrainSummary>* summaries) {
  config.Validate();
  if (train.empty()) throw DegenerateDataError("no training examples");

  StanceSystem system;
  system.config = config;
  system.config.log = nullptr;
  system.config.on_epoch = nullptr;
  system.prep = std::move(prep);
  system.prep.enabled = config.clean;
  system.vocab = BuildVocab(train, system.prep, config.min_count);

  std::vector<std::pair<std::string, std::vector<Example>>> groups;
  if (config.per_target) {
    for (const std::string& target : TargetsOf(train)) {
      groups.emplace_back(target, FilterByTarget(train, target));
    }
  } else {
    groups.emplace_back(std::string(kPooledKey),
                        std::vector<Example>(train.begin(), train.end()));
  }
  for (const auto& [key, examples] : groups) {
    if (!HasBothPolarities(examples)) {
      throw DegenerateDataError("target '" + key +
                                "' has no FAVOR or no AGAINST training example");
    }
  }

  std::vector<TrainSummary> results(groups.size());
  const unsigned threads = std::max(1u, config.threads);
  if (threads == 1 || groups.size() == 1) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      results[g] = TrainGroup(groups[g].first, groups[g].second, system.vocab,
                              system.prep, config);
    }
  } else {
    // Workers log into private buffers, flushed in group order.
    for (std::size_t start = 0; start < groups.size(); start += threads) {
      const std::size_t end = std::min(groups.size(), start + threads);
      std::vector<std::ostringstream> logs(end - start);
      std::vector<std::future<TrainSummary>> jobs;
      for (std::size_t g = start; g < end; ++g) {
        TrainConfig local = config;
        if (config.log) local.log = &logs[g - start];
        jobs.push_back(std::async(std::launch::async, [&, g, local] {
          return TrainGroup(groups[g].first, groups[g].second, system.vocab,
                            system.prep, local);
        }));
      }
      for (std::size_t g = start; g < end; ++g) {
        results[g] = jobs[g - start].get();
        if (config.log) *config.log << logs[g - start].str();
      }
    }
  }

  for (TrainSummary& s : results) {
    system.models.emplace(s.key, TwoPhaseModel{s.phase1.model, s.phase2.model});
  }
  if (summaries) *summaries = std::move(results);
  return system;
}

// ---------------------------------------------------------------------------
// Checkpoint directory

void SaveSystem(const StanceSystem& system, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string vocab_hash = HashHex(system.vocab.Hash());
  const TrainConfig& c = system.config;

  std::ostringstream manifest;
  manifest << "format=stance-checkpoint\n"
           << "version=" << kCheckpointDirVersion << "\n"
           << "mode=" << (system.pooled() ? "pooled" : "per-target") << "\n"
           << "clean=" << (system.prep.enabled ? 1 : 0) << "\n"
           << "vocab_hash=" << vocab_hash << "\n"
           << "vocab_size=" << system.vocab.size() << "\n"
           << "models=" << system.models.size() << "\n";
  WriteFile(dir / "MANIFEST", manifest.str());

  std::ostringstream slang;
  for (const auto& [key, expansion] : system.prep.slang.entries()) {
    slang << key << '\t' << Join(expansion) << '\n';
  }
  WriteFile(dir / "slang.tsv", slang.str());
  std::ostringstream stops;
  for (const std::string& w : system.prep.stopwords.words()) stops << w << '\n';
  WriteFile(dir / "stopwords.txt", stops.str());

  std::ostringstream index;
  std::size_t i = 0;
  for (const auto& [key, cascade] : system.models) {
    const std::string sub = SubdirName(i++, key);
    index << key << '\t' << sub << '\n';
    const fs::path sub_dir = dir / sub;
    fs::create_directories(sub_dir);
    SavePhaseModel(sub_dir / "phase1.ckpt", cascade.phase1, system.vocab);
    SavePhaseModel(sub_dir / "phase2.ckpt", cascade.phase2, system.vocab);
    std::ostringstream sub_manifest;
    sub_manifest << std::setprecision(17) << "target=" << key << "\n"
                 << "vocab_hash=" << vocab_hash << "\n"
                 << "optimizer=" << OptimizerName(c.optimizer) << "\n"
                 << "learning_rate=" << c.learning_rate << "\n"
                 << "epochs=" << c.epochs << "\n"
                 << "batch_size=" << c.batch_size << "\n"
                 << "seed=" << c.seed << "\n"
                 << "embed_dim=" << cascade.phase1.config.embed_dim << "\n"
                 << "hidden_dim=" << cascade.phase1.config.hidden_dim << "\n"
                 << "attention=" << (cascade.phase1.config.attention ? 1 : 0) << "\n"
                 << "clip_gradients=" << (c.clip_gradients ? 1 : 0) << "\n";
    WriteFile(sub_dir / "manifest.txt", sub_manifest.str());
  }
  WriteFile(dir / "targets.tsv", index.str());
}

StanceSystem LoadSystem(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "MANIFEST";
  const auto manifest = ReadKeyValues(manifest_path);
  if (Require(manifest, "format", manifest_path) != "stance-checkpoint") {
    throw LoadError(manifest_path.string() + ": not a stance checkpoint");
  }
  const std::string& version = Require(manifest, "version", manifest_path);
  if (version != std::to_string(kCheckpointDirVersion)) {
    throw VersionMismatchError(manifest_path.string() + ": checkpoint version " + version +
                               ", expected " + std::to_string(kCheckpointDirVersion));
  }
  const std::string& vocab_hash = Require(manifest, "vocab_hash", manifest_path);

  StanceSystem system;
  system.prep = TextPrep::FromDirectory(dir, Require(manifest, "clean", manifest_path) == "1");
  system.config.clean = system.prep.enabled;
  system.config.per_target = Require(manifest, "mode", manifest_path) != "pooled";

  std::ifstream index(dir / "targets.tsv");
  if (!index) throw LoadError("missing " + (dir / "targets.tsv").string());
  std::string line;
  bool first = true;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw LoadError("malformed targets.tsv line: " + line);
    const std::string key = line.substr(0, tab);
    const std::filesystem::path sub = dir / line.substr(tab + 1);
    const auto sub_manifest = ReadKeyValues(sub / "manifest.txt");
    if (Require(sub_manifest, "vocab_hash", sub / "manifest.txt") != vocab_hash) {
      throw ShapeMismatchError(sub.string() + ": vocabulary hash differs from MANIFEST");
    }
    LoadedPhaseModel p1 = LoadPhaseModel(sub / "phase1.ckpt");
    LoadedPhaseModel p2 = LoadPhaseModel(sub / "phase2.ckpt");
    for (const Vocab* v : {&p1.vocab, &p2.vocab}) {
      if (HashHex(v->Hash()) != vocab_hash) {
        throw ShapeMismatchError(sub.string() + ": phase vocabulary does not match MANIFEST");
      }
    }
    if (p1.model.config.embed_dim != p2.model.config.embed_dim ||
        p1.model.config.hidden_dim != p2.model.config.hidden_dim) {
      throw ShapeMismatchError(sub.string() + ": phase models disagree on sizes");
    }
    if (first) {
      system.vocab = std::move(p1.vocab);
      system.config.embed_dim = p1.model.config.embed_dim;
      system.config.hidden_dim = p1.model.config.hidden_dim;
      system.config.attention = p1.model.config.attention;
      system.config.seed = std::stoull(Require(sub_manifest, "seed", sub / "manifest.txt"));
      system.config.optimizer =
          ParseOptimizerKind(Require(sub_manifest, "optimizer", sub / "manifest.txt"));
      system.config.learning_rate =
          std::stod(Require(sub_manifest, "learning_rate", sub / "manifest.txt"));
      system.config.epochs = std::stoi(Require(sub_manifest, "epochs", sub / "manifest.txt"));
      system.config.batch_size =
          std::stoull(Require(sub_manifest, "batch_size", sub / "manifest.txt"));
      first = false;
    }
    system.models.emplace(key, TwoPhaseModel{std::move(p1.model), std::move(p2.model)});
  }
  if (system.models.empty()) throw LoadError(dir.string() + ": checkpoint holds no models");
  return system;
}

}  // namespace stance
