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

#ifndef STANCE_CORPUS_H_
#define STANCE_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stance/textprep.h"

namespace stance {

// Fixed class order; the index is used as the class id everywhere.
enum class Stance { kFavor = 0, kAgainst = 1, kNone = 2 };
enum class Phase1Label { kSubjective = 0, kNeutral = 1 };

inline constexpr Stance kAllStances[] = {Stance::kFavor, Stance::kAgainst, Stance::kNone};

std::string_view StanceName(Stance stance);
// Case-insensitive match against FAVOR / AGAINST / NONE; throws ParseError.
Stance ParseStance(std::string_view text);
std::string_view Phase1Name(Phase1Label label);

Phase1Label DerivePhase1(Stance stance);

struct Example {
  std::string id;
  std::string target;
  std::string tweet;
  Stance stance = Stance::kNone;
};

// Reads a SemEval stance TSV: a header row naming at least the ID, Target,
// Tweet and Stance columns (any order, extra columns ignored), then one row
// per example. Windows-1252 input is transcoded to UTF-8.
std::vector<Example> LoadSemEval(const std::filesystem::path& path);
std::vector<Example> ParseSemEval(std::istream& in, const std::string& source = "<stream>");

// Writes ID, Target, Tweet, Stance with a header row.
void WriteSemEval(std::ostream& out, std::span<const Example> examples);

// Returns `bytes` unchanged if it is valid UTF-8, otherwise decodes it as
// Windows-1252. A UTF-8 byte-order mark is dropped.
std::string ToUtf8(std::string_view bytes);

// Exact match on the target string; throws UnknownTargetError listing the
// targets present when nothing matches.
std::vector<Example> FilterByTarget(std::span<const Example> examples,
                                    std::string_view target);
// Distinct targets in first-appearance order.
std::vector<std::string> TargetsOf(std::span<const Example> examples);

struct StanceBreakdown {
  std::string target;  // "All" for the pooled row
  std::size_t count = 0;
  // Percentages of FAVOR, AGAINST, NONE.
  std::array<double, 3> percent{};
};

// One row per target in first-appearance order, then an "All" row.
std::vector<StanceBreakdown> StanceStats(std::span<const Example> examples);

// Seeded split into (train, holdout); holdout gets round(fraction * n).
std::pair<std::vector<Example>, std::vector<Example>> SplitHoldout(
    std::span<const Example> examples, double fraction, std::uint64_t seed);

using TokenId = std::size_t;

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab();

  // Ids assigned by frequency (descending), ties broken lexicographically.
  // Tokens seen fewer than `min_count` times are left out (they encode as
  // UNK) unless listed in `always_include`.
  static Vocab Build(std::span<const Tokens> sequences, int min_count,
                     const std::set<std::string>& always_include = {});

  // Rebuilds from an id-ordered token list, which must start with the two
  // reserved tokens.
  static Vocab FromTokens(std::vector<std::string> tokens);

  TokenId Id(const std::string& token) const;
  const std::string& Token(TokenId id) const { return tokens_.at(id); }
  bool Contains(const std::string& token) const { return index_.count(token) > 0; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // FNV-1a over the id-ordered token list.
  std::uint64_t Hash() const;

  std::vector<TokenId> Encode(const Tokens& tokens) const;

 private:
  void Reindex();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Vocabulary over cleaned tweet tokens plus (always included) raw-tokenized
// target tokens. Pass the training split only.
Vocab BuildVocab(std::span<const Example> examples, const TextPrep& prep,
                 int min_count = 1);

struct EncodedExample {
  std::vector<TokenId> tokens;
  std::vector<TokenId> target_tokens;
  Phase1Label phase1 = Phase1Label::kNeutral;
  Stance stance = Stance::kNone;
};

// Tweet goes through `prep`; the target is only tokenized.
EncodedExample Encode(const Example& example, const Vocab& vocab, const TextPrep& prep);
std::vector<EncodedExample> EncodeAll(std::span<const Example> examples,
                                      const Vocab& vocab, const TextPrep& prep);

}  // namespace stance

#endif  // STANCE_CORPUS_H_
