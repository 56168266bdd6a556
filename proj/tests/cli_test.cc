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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "stance/corpus.h"
#include "synthetic.h"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult Run(const std::string& args) {
  const std::string cmd = std::string(STANCE_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 512> buf;
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(Run("").exit_code == 1);
  CHECK(Run("train --bogus").exit_code == 1);
  CHECK(Run("train --data /nonexistent.tsv --out x").exit_code == 1);
  CHECK(Run("train --optimizer rmsprop --data " STANCE_SOURCE_DATA_DIR "/slang.tsv --out x")
            .exit_code == 1);
  // A readable file that is not a corpus is a data error.
  CHECK(Run("train --data " STANCE_SOURCE_DATA_DIR "/stopwords.txt --out /tmp/x").exit_code == 2);
  const RunResult grad = Run("gradcheck");
  CHECK(grad.exit_code == 0);
  CHECK(grad.output.find("attention") != std::string::npos);
}

TEST_CASE("train, predict, evaluate") {
  const fs::path dir = fs::temp_directory_path() / "stance_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<stance::Example> corpus = stance::testing::OverfitCorpus();
  {
    std::ofstream out(dir / "train.tsv");
    stance::WriteSemEval(out, corpus);
  }
  const std::string d = dir.string();

  const RunResult train =
      Run("train --data " + d + "/train.tsv --out " + d + "/model --epochs 40 --lr 0.01 --clean");
  INFO(train.output);
  REQUIRE(train.exit_code == 0);
  CHECK(fs::exists(dir / "model" / "MANIFEST"));

  const RunResult predict =
      Run("predict --model " + d + "/model --data " + d + "/train.tsv --out " + d + "/pred.tsv");
  INFO(predict.output);
  REQUIRE(predict.exit_code == 0);
  CHECK(stance::LoadSemEval(dir / "pred.tsv").size() == corpus.size());

  const RunResult eval = Run("evaluate --gold " + d + "/train.tsv --pred " + d + "/pred.tsv --per-target");
  INFO(eval.output);
  CHECK(eval.exit_code == 0);
  CHECK(eval.output.find("Atheism") != std::string::npos);

  CHECK(Run("train --data " + d + "/train.tsv --out " + d + "/m2 --target Nope").exit_code == 2);
  CHECK(Run("predict --model " + d + "/missing --data " + d + "/train.tsv --out " + d + "/p.tsv")
            .exit_code == 2);
  fs::remove_all(dir);
}
