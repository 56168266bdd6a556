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

#include "stance/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "stance/errors.h"

namespace stance {
namespace {

std::string UpperAscii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

bool IsValidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    if (c < 0x80) len = 1;
    else if ((c & 0xE0) == 0xC0 && c >= 0xC2) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0 && c <= 0xF4) len = 4;
    else return false;
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += len;
  }
  return true;
}

void AppendUtf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Windows-1252 code points for bytes 0x80..0x9F; zero marks undefined bytes,
// which are passed through as the matching C1 control.
constexpr char32_t kCp1252High[32] = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
    0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, 0,      0x017D, 0,
    0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
    0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};

}  // namespace

std::string_view StanceName(Stance stance) {
  switch (stance) {
    case Stance::kFavor: return "FAVOR";
    case Stance::kAgainst: return "AGAINST";
    case Stance::kNone: return "NONE";
  }
  return "NONE";
}

Stance ParseStance(std::string_view text) {
  const std::string upper = UpperAscii(text);
  if (upper == "FAVOR") return Stance::kFavor;
  if (upper == "AGAINST") return Stance::kAgainst;
  if (upper == "NONE") return Stance::kNone;
  throw ParseError("unknown stance '" + std::string(text) + "'");
}

std::string_view Phase1Name(Phase1Label label) {
  return label == Phase1Label::kSubjective ? "SUBJECTIVE" : "NEUTRAL";
}

Phase1Label DerivePhase1(Stance stance) {
  return stance == Stance::kNone ? Phase1Label::kNeutral : Phase1Label::kSubjective;
}

std::string ToUtf8(std::string_view bytes) {
  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
  if (IsValidUtf8(bytes)) return std::string(bytes);
  std::string out;
  out.reserve(bytes.size() + bytes.size() / 8);
  for (char ch : bytes) {
    const auto c = static_cast<unsigned char>(ch);
    char32_t cp = c;
    if (c >= 0x80 && c < 0xA0 && kCp1252High[c - 0x80] != 0) cp = kCp1252High[c - 0x80];
    AppendUtf8(out, cp);
  }
  return out;
}

std::vector<Example> ParseSemEval(std::istream& in, const std::string& source) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::istringstream text(ToUtf8(buffer.str()));

  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(text, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      header = SplitTabs(line);
      break;
    }
  }
  if (header.empty()) throw FormatError(source + ": missing header row");

  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (UpperAscii(header[i]) == UpperAscii(name)) return i;
    }
    throw FormatError(source + ": missing column '" + std::string(name) + "'");
  };
  const std::size_t id_col = column("ID");
  const std::size_t target_col = column("Target");
  const std::size_t tweet_col = column("Tweet");
  const std::size_t stance_col = column("Stance");
  const std::size_t needed = std::max({id_col, target_col, tweet_col, stance_col}) + 1;

  std::vector<Example> examples;
  while (std::getline(text, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() < needed) {
      throw FormatError(where + ": expected at least " + std::to_string(needed) +
                        " tab-separated fields, got " + std::to_string(fields.size()));
    }
    Example ex;
    ex.id = fields[id_col];
    ex.target = fields[target_col];
    ex.tweet = fields[tweet_col];
    try {
      ex.stance = ParseStance(fields[stance_col]);
    } catch (const ParseError&) {
      throw ParseError(where + ": unknown stance '" + fields[stance_col] + "'");
    }
    if (ex.target.empty() || ex.tweet.empty()) {
      throw ParseError(where + ": empty target or tweet");
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

std::vector<Example> LoadSemEval(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return ParseSemEval(in, path.string());
}

void WriteSemEval(std::ostream& out, std::span<const Example> examples) {
  out << "ID\tTarget\tTweet\tStance\n";
  for (const Example& ex : examples) {
    out << ex.id << '\t' << ex.target << '\t' << ex.tweet << '\t'
        << StanceName(ex.stance) << '\n';
  }
}

std::vector<std::string> TargetsOf(std::span<const Example> examples) {
  std::vector<std::string> targets;
  for (const Example& ex : examples) {
    if (std::find(targets.begin(), targets.end(), ex.target) == targets.end()) {
      targets.push_back(ex.target);
    }
  }
  return targets;
}

std::vector<Example> FilterByTarget(std::span<const Example> examples,
                                    std::string_view target) {
  std::vector<Example> out;
  std::copy_if(examples.begin(), examples.end(), std::back_inserter(out),
               [&](const Example& ex) { return ex.target == target; });
  if (out.empty()) {
    std::string valid;
    for (const std::string& t : TargetsOf(examples)) {
      if (!valid.empty()) valid += ", ";
      valid += "'" + t + "'";
    }
    throw UnknownTargetError("unknown target '" + std::string(target) +
                             "'; valid targets: " + (valid.empty() ? "(none)" : valid));
  }
  return out;
}

std::vector<StanceBreakdown> StanceStats(std::span<const Example> examples) {
  std::vector<StanceBreakdown> rows;
  std::vector<std::array<std::size_t, 3>> counts;
  std::array<std::size_t, 3> all{};
  for (const Example& ex : examples) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const StanceBreakdown& r) { return r.target == ex.target; });
    if (it == rows.end()) {
      rows.push_back({ex.target, 0, {}});
      counts.push_back({});
      it = std::prev(rows.end());
    }
    const auto k = static_cast<std::size_t>(ex.stance);
    ++counts[static_cast<std::size_t>(it - rows.begin())][k];
    ++it->count;
    ++all[k];
  }
  rows.push_back({"All", examples.size(), {}});
  counts.push_back(all);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].count == 0) continue;
    for (std::size_t k = 0; k < 3; ++k) {
      rows[r].percent[k] =
          100.0 * static_cast<double>(counts[r][k]) / static_cast<double>(rows[r].count);
    }
  }
  return rows;
}

std::pair<std::vector<Example>, std::vector<Example>> SplitHoldout(
    std::span<const Example> examples, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw std::invalid_argument("holdout fraction must be in [0, 1)");
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto held = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(examples.size())));
  std::vector<bool> is_held(examples.size(), false);
  for (std::size_t i = 0; i < held; ++i) is_held[order[i]] = true;
  std::pair<std::vector<Example>, std::vector<Example>> split;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (is_held[i] ? split.second : split.first).push_back(examples[i]);
  }
  return split;
}

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab() : tokens_{std::string(kPadToken), std::string(kUnkToken)} {
  Reindex();
}

void Vocab::Reindex() {
  index_.clear();
  for (TokenId id = 0; id < tokens_.size(); ++id) {
    if (!index_.emplace(tokens_[id], id).second) {
      throw FormatError("duplicate vocabulary entry '" + tokens_[id] + "'");
    }
  }
}

Vocab Vocab::FromTokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw FormatError("vocabulary must start with " + std::string(kPadToken) + " and " +
                      std::string(kUnkToken));
  }
  Vocab v;
  v.tokens_ = std::move(tokens);
  v.Reindex();
  return v;
}

Vocab Vocab::Build(std::span<const Tokens> sequences, int min_count,
                   const std::set<std::string>& always_include) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const Tokens& seq : sequences)
    for (const std::string& t : seq) ++counts[t];
  for (const std::string& t : always_include) counts.try_emplace(t, 0);

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts) {
    if (token == kPadToken || token == kUnkToken) continue;
    if (count >= static_cast<std::size_t>(min_count) || always_include.count(token)) {
      kept.emplace_back(token, count);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  Vocab v;
  for (auto& [token, count] : kept) v.tokens_.push_back(token);
  v.Reindex();
  return v;
}

TokenId Vocab::Id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::uint64_t Vocab::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string& t : tokens_) {
    for (unsigned char c : t) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<TokenId> Vocab::Encode(const Tokens& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(Id(t));
  return ids;
}

Vocab BuildVocab(std::span<const Example> examples, const TextPrep& prep, int min_count) {
  if (examples.empty()) throw EmptyInputError("cannot build a vocabulary from no examples");
  std::vector<Tokens> sequences;
  sequences.reserve(examples.size());
  std::set<std::string> target_tokens;
  for (const std::string& target : TargetsOf(examples)) {
    for (std::string& t : Tokenize(target)) target_tokens.insert(std::move(t));
  }
  for (const Example& ex : examples) sequences.push_back(prep.Clean(ex.tweet));
  return Vocab::Build(sequences, min_count, target_tokens);
}

EncodedExample Encode(const Example& example, const Vocab& vocab, const TextPrep& prep) {
  EncodedExample enc;
  enc.tokens = vocab.Encode(prep.Clean(example.tweet));
  enc.target_tokens = vocab.Encode(Tokenize(example.target));
  // A tweet made only of punctuation tokenizes to nothing; keep m >= 1.
  if (enc.tokens.empty()) enc.tokens.push_back(Vocab::kUnk);
  if (enc.target_tokens.empty()) {
    throw DataError("target '" + example.target + "' has no tokens");
  }
  enc.stance = example.stance;
  enc.phase1 = DerivePhase1(example.stance);
  return enc;
}

std::vector<EncodedExample> EncodeAll(std::span<const Example> examples,
                                      const Vocab& vocab, const TextPrep& prep) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) out.push_back(Encode(ex, vocab, prep));
  return out;
}

}  // namespace stance
