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

#include "stance/textprep.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include "stance/errors.h"

#ifndef STANCE_DEFAULT_DATA_DIR
#define STANCE_DEFAULT_DATA_DIR "data"
#endif

namespace stance {
namespace {

bool IsSpace(unsigned char c) { return std::isspace(c) != 0; }

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

std::string_view TrimSpace(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

// Curly quotes and the ellipsis, which tweets use as punctuation.
constexpr std::string_view kUnicodePunct[] = {
    "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\xA6"};

// Length of the punctuation mark at the front (or back) of `s`; 0 if none.
std::size_t LeadingPunct(std::string_view s) {
  if (s.empty()) return 0;
  const auto c = static_cast<unsigned char>(s.front());
  if (c < 0x80) return std::ispunct(c) ? 1 : 0;
  for (std::string_view p : kUnicodePunct)
    if (s.starts_with(p)) return p.size();
  return 0;
}

std::size_t TrailingPunct(std::string_view s) {
  if (s.empty()) return 0;
  const auto c = static_cast<unsigned char>(s.back());
  if (c < 0x80) return std::ispunct(c) ? 1 : 0;
  for (std::string_view p : kUnicodePunct)
    if (s.ends_with(p)) return p.size();
  return 0;
}

std::string NormalizeChunk(std::string_view chunk) {
  const std::string lower = Lower(chunk);
  if (lower == kUrlToken || lower == kUserToken) return lower;

  std::string_view s = lower;
  std::size_t begin = 0;
  while (begin < s.size()) {
    const std::size_t n = LeadingPunct(s.substr(begin));
    if (n == 0) break;
    begin += n;
  }
  if (begin > 0 && begin < s.size() && (s[begin - 1] == '#' || s[begin - 1] == '@')) {
    --begin;
  }
  s.remove_prefix(begin);
  while (!s.empty()) {
    const std::size_t n = TrailingPunct(s);
    if (n == 0) break;
    s.remove_suffix(n);
  }
  if (s.starts_with("http://") || s.starts_with("https://") || s.starts_with("www.")) {
    return std::string(kUrlToken);
  }
  if (s.size() > 1 && s.front() == '@') return std::string(kUserToken);
  return std::string(s);
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

SlangDict::SlangDict(const std::map<std::string, std::string>& entries) {
  for (const auto& [raw_key, expansion] : entries) {
    const std::string key = Lower(TrimSpace(raw_key));
    if (key.empty()) throw ParseError("slang dictionary: empty key");
    const std::string value = Lower(TrimSpace(expansion));
    if (value == key) throw ParseError("slang dictionary: '" + key + "' maps to itself");
    Tokens tokens = Tokenize(value);
    if (tokens.empty()) throw ParseError("slang dictionary: empty expansion for '" + key + "'");
    entries_[key] = std::move(tokens);
  }
}

SlangDict SlangDict::Load(const std::filesystem::path& path) {
  std::ifstream in = OpenOrThrow(path);
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (TrimSpace(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected slang<TAB>expansion");
    }
    entries[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return SlangDict(entries);
}

const Tokens* SlangDict::Find(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

StopwordSet::StopwordSet(const std::vector<std::string>& words) {
  for (const std::string& w : words) {
    std::string word = Lower(TrimSpace(w));
    if (word.empty()) throw ParseError("stopword list: empty entry");
    words_.insert(std::move(word));
  }
}

StopwordSet StopwordSet::Load(const std::filesystem::path& path) {
  std::ifstream in = OpenOrThrow(path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view word = TrimSpace(line);
    if (word.empty() || word.front() == '#') continue;
    words.emplace_back(word);
  }
  return StopwordSet(words);
}

Tokens Tokenize(std::string_view text) {
  Tokens tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) {
      std::string token = NormalizeChunk(text.substr(i, j - i));
      if (!token.empty()) tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

Tokens NormalizeSlang(const Tokens& tokens, const SlangDict& dict) {
  Tokens out;
  out.reserve(tokens.size());
  for (const std::string& token : tokens) {
    if (const Tokens* expansion = dict.Find(token)) {
      out.insert(out.end(), expansion->begin(), expansion->end());
    } else {
      out.push_back(token);
    }
  }
  return out;
}

Tokens RemoveStopwords(const Tokens& tokens, const StopwordSet& stops) {
  Tokens out;
  std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(out),
               [&](const std::string& t) { return !stops.Contains(t); });
  if (out.empty()) return tokens;
  return out;
}

Tokens Clean(std::string_view text, const SlangDict& dict,
             const StopwordSet& stops, bool enabled) {
  Tokens tokens = Tokenize(text);
  if (!enabled) return tokens;
  return RemoveStopwords(NormalizeSlang(tokens, dict), stops);
}

Tokens TextPrep::Clean(std::string_view text) const {
  return stance::Clean(text, slang, stopwords, enabled);
}

TextPrep TextPrep::FromDirectory(const std::filesystem::path& dir, bool enabled) {
  TextPrep prep;
  prep.enabled = enabled;
  prep.slang = SlangDict::Load(dir / "slang.tsv");
  prep.stopwords = StopwordSet::Load(dir / "stopwords.txt");
  return prep;
}

std::filesystem::path DefaultResourceDir() {
  if (const char* env = std::getenv("STANCE_DATA_DIR"); env && *env) return env;
  return STANCE_DEFAULT_DATA_DIR;
}

std::string Join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace stance
