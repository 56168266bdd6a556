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

#ifndef STANCE_TEXTPREP_H_
#define STANCE_TEXTPREP_H_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

using Tokens = std::vector<std::string>;

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

// Lowercase slang token -> replacement phrase.
class SlangDict {
 public:
  SlangDict() = default;
  // Throws ParseError on an empty key or an entry mapping to itself.
  explicit SlangDict(const std::map<std::string, std::string>& entries);

  // File format: one `slang<TAB>expansion` entry per line. Blank lines and
  // lines starting with '#' are skipped.
  static SlangDict Load(const std::filesystem::path& path);

  // Tokenized expansion, or nullptr when `token` is not a key.
  const Tokens* Find(const std::string& token) const;
  bool Contains(const std::string& token) const { return Find(token) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Tokens>& entries() const { return entries_; }

 private:
  std::map<std::string, Tokens> entries_;
};

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(const std::vector<std::string>& words);

  // One lowercase token per line; '#' lines and blank lines are ignored.
  static StopwordSet Load(const std::filesystem::path& path);

  bool Contains(const std::string& token) const { return words_.count(token) > 0; }
  std::size_t size() const { return words_.size(); }
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

// Lowercases, splits on whitespace and trims punctuation from both ends of
// each token. A '#' or '@' directly in front of the first word character is
// kept. URLs become <url> and @mentions become <user>.
Tokens Tokenize(std::string_view text);

// Single left-to-right pass; expansions are not expanded again.
Tokens NormalizeSlang(const Tokens& tokens, const SlangDict& dict);

// Order-preserving filter. Returns the input unchanged if every token is a
// stopword, so a nonempty sequence never becomes empty.
Tokens RemoveStopwords(const Tokens& tokens, const StopwordSet& stops);

struct TextPrep {
  SlangDict slang;
  StopwordSet stopwords;
  bool enabled = false;

  // Tokenize, then (when enabled) normalize slang and drop stopwords.
  Tokens Clean(std::string_view text) const;

  // Loads slang.tsv and stopwords.txt from `dir`.
  static TextPrep FromDirectory(const std::filesystem::path& dir, bool enabled);
};

Tokens Clean(std::string_view text, const SlangDict& dict,
             const StopwordSet& stops, bool enabled);

// Directory holding the shipped slang and stopword resources. Honours the
// STANCE_DATA_DIR environment variable.
std::filesystem::path DefaultResourceDir();

std::string Join(const Tokens& tokens, std::string_view sep = " ");

}  // namespace stance

#endif  // STANCE_TEXTPREP_H_
