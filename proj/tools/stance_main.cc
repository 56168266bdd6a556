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

// Command-line front end: train, predict, evaluate, gradcheck.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stance/corpus.h"
#include "stance/errors.h"
#include "stance/eval.h"
#include "stance/gradcheck_suite.h"
#include "stance/optimizer.h"
#include "stance/pipeline.h"
#include "stance/textprep.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct TrainArgs {
  std::string data;
  std::string target;
  bool pooled = false;
  bool clean = false;
  bool no_attention = false;
  std::string optimizer = "adam";
  double lr = 0.005;
  int epochs = 30;
  std::size_t batch = 32;
  std::uint64_t seed = 7;
  std::string embeddings;
  std::string out;
};

int RunTrain(const TrainArgs& args) {
  using namespace stance;
  TrainConfig config;
  config.optimizer = ParseOptimizerKind(args.optimizer);
  config.learning_rate = args.lr;
  config.epochs = args.epochs;
  config.batch_size = args.batch;
  config.seed = args.seed;
  config.clean = args.clean;
  config.attention = !args.no_attention;
  config.per_target = !args.pooled;
  config.pretrained_embeddings = args.embeddings;
  config.log = &std::cerr;

  std::vector<Example> train = LoadSemEval(args.data);
  if (!args.target.empty()) train = FilterByTarget(train, args.target);
  std::cerr << "loaded " << train.size() << " training examples from " << args.data << "\n";

  TextPrep prep = TextPrep::FromDirectory(DefaultResourceDir(), args.clean);
  const StanceSystem system = TrainAll(train, config, std::move(prep));
  SaveSystem(system, args.out);
  std::cerr << "saved " << system.models.size() << " model(s) to " << args.out << "\n";
  return kExitOk;
}

int RunPredict(const std::string& model_dir, const std::string& data, const std::string& out) {
  using namespace stance;
  const StanceSystem system = LoadSystem(model_dir);
  std::vector<Example> examples = LoadSemEval(data);
  const auto predictions = system.PredictAll(examples);
  for (std::size_t i = 0; i < examples.size(); ++i) examples[i].stance = predictions[i];
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot write " + out);
  WriteSemEval(file, examples);
  std::cerr << "wrote " << examples.size() << " predictions to " << out << "\n";
  return kExitOk;
}

int RunEvaluate(const std::string& gold, const std::string& pred, bool per_target) {
  using namespace stance;
  const EvalReport report = EvaluateFiles(gold, pred);
  WriteReportTable(std::cout, report, per_target);
  std::cout << "\n";
  WriteReportKeyValues(std::cout, report, per_target);
  return kExitOk;
}

int RunGradCheck(std::uint64_t seed) {
  using namespace stance;
  GradCheckOptions options;
  options.seed = seed;
  const auto results = RunGradCheckSuite(options);
  bool ok = true;
  for (const GradCheckResult& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " rel_err=" << r.relative_error
              << "\n";
    ok = ok && r.passed;
  }
  std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (" << results.size()
            << " checks, tolerance " << options.tolerance << ")\n";
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase attention bi-LSTM stance detection"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train per-target (or pooled) cascades");
  train_cmd->add_option("--data", train.data, "Training TSV")->required()->check(CLI::ExistingFile);
  auto* target_opt = train_cmd->add_option("--target", train.target, "Train a single target");
  train_cmd->add_flag("--pooled", train.pooled, "One model over all targets")->excludes(target_opt);
  train_cmd->add_flag("--clean", train.clean, "Slang normalization and stopword removal");
  train_cmd->add_flag("--no-attention", train.no_attention, "Mean-pool instead of attention");
  train_cmd->add_option("--optimizer", train.optimizer, "sgd or adam")
      ->check(CLI::IsMember({"sgd", "adam"}, CLI::ignore_case));
  train_cmd->add_option("--lr", train.lr, "Learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", train.epochs, "Epochs per phase")->check(CLI::Range(1, 1000000));
  train_cmd->add_option("--batch", train.batch, "Mini-batch size")->check(CLI::Range(1, 1000000));
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--embeddings", train.embeddings, "Pretrained vectors (token v1 ... vd)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Checkpoint directory")->required();

  std::string model_dir, predict_data, predict_out;
  auto* predict_cmd = app.add_subcommand("predict", "Write stance predictions for a TSV");
  predict_cmd->add_option("--model", model_dir, "Checkpoint directory")->required();
  predict_cmd->add_option("--data", predict_data, "Input TSV")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", predict_out, "Prediction TSV")->required();

  std::string gold, pred;
  bool per_target = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against gold labels");
  eval_cmd->add_option("--gold", gold, "Gold TSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", pred, "Prediction TSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_flag("--per-target", per_target, "Add one row per target");

  std::uint64_t grad_seed = 7;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  grad_cmd->add_option("--seed", grad_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return RunTrain(train);
    if (*predict_cmd) return RunPredict(model_dir, predict_data, predict_out);
    if (*eval_cmd) return RunEvaluate(gold, pred, per_target);
    if (*grad_cmd) return RunGradCheck(grad_seed);
  } catch (const stance::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const stance::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
