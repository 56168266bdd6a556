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

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "stance/errors.h"
#include "stance/textprep.h"

using namespace stance;

namespace {

using Entries = std::map<std::string, std::string>;

const std::filesystem::path kData = STANCE_SOURCE_DATA_DIR;

std::filesystem::path WriteTemp(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path;
}

std::string RandomText(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "Hello", "WORLD", "it's", "#Tag", "@user_1", "...", "!", "(", ")", "\"quoted\"",
      "http://t.co/abc", "www.example.com", "#", "@", "--", "a.b", "x", "\xE2\x80\x9Chi\xE2\x80\x9D",
      "#SemST", "lol", "<url>", "<user>", "caf\xC3\xA9", "?!", "@@foo", "##bar"};
  static const std::vector<std::string> spaces = {" ", "  ", "\t", "\n", ""};
  std::uniform_int_distribution<std::size_t> count(0, 12), piece(0, pieces.size() - 1),
      space(0, spaces.size() - 1);
  std::string text;
  for (std::size_t i = count(rng); i > 0; --i) {
    text += pieces[piece(rng)];
    text += spaces[space(rng)];
  }
  return text;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(Tokenize("Be still. Be patient.") == Tokens{"be", "still", "be", "patient"});
  CHECK(Tokenize("#Freedom") == Tokens{"#freedom"});
  CHECK(Tokenize("").empty());
  CHECK(Tokenize("   \t\n ").empty());
  CHECK(Tokenize("Everyone is able to believe in whatever they want. #Freedom") ==
        Tokens{"everyone", "is", "able", "to", "believe", "in", "whatever", "they", "want",
               "#freedom"});
  CHECK(Tokenize("@OliviaJeniferx it's not always the guys job. #equality") ==
        Tokens{"<user>", "it's", "not", "always", "the", "guys", "job", "#equality"});
  CHECK(Tokenize("Friendly reminder that the \"Gender Pay Gap\" is a myth.") ==
        Tokens{"friendly", "reminder", "that", "the", "gender", "pay", "gap", "is", "a", "myth"});
  CHECK(Tokenize("read https://t.co/XyZ! now") == Tokens{"read", "<url>", "now"});
  CHECK(Tokenize("(#Love) ...") == Tokens{"#love"});
  CHECK(Tokenize("\xE2\x80\x9CQuote\xE2\x80\x9D") == Tokens{"quote"});
  CHECK(Tokenize("# @ !!") == Tokens{});
}

TEST_CASE("tokenize is idempotent over its own output") {
  std::mt19937_64 rng(2016);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string text = RandomText(rng);
    const Tokens once = Tokenize(text);
    INFO("text: " << text);
    CHECK(Tokenize(Join(once)) == once);
    for (const std::string& t : once) CHECK_FALSE(t.empty());
  }
}

TEST_CASE("slang normalization") {
  const SlangDict dict({{"lol", "laughing out loud"}, {"u", "you"}});
  CHECK(NormalizeSlang({"lol"}, dict) == Tokens{"laughing", "out", "loud"});
  CHECK(NormalizeSlang({"u", "rock"}, dict) == Tokens{"you", "rock"});
  CHECK(NormalizeSlang({"hello"}, dict) == Tokens{"hello"});
  CHECK(NormalizeSlang({}, dict).empty());

  SUBCASE("single pass") {
    // "brb" expands to a phrase containing another key; it is not expanded again.
    const SlangDict chained({{"brb", "be right back u"}, {"u", "you"}});
    CHECK(NormalizeSlang({"brb"}, chained) == Tokens{"be", "right", "back", "u"});
  }

  SUBCASE("shipped dictionary") {
    const SlangDict shipped = SlangDict::Load(kData / "slang.tsv");
    CHECK(shipped.size() > 50);
    CHECK(NormalizeSlang({"lol"}, shipped) == Tokens{"laughing", "out", "loud"});
    for (const auto& [key, expansion] : shipped.entries()) {
      CHECK_FALSE(key.empty());
      CHECK(Tokens{key} != expansion);
    }
  }

  SUBCASE("invariants are enforced") {
    CHECK_THROWS_AS(SlangDict(Entries{{"lol", "lol"}}), ParseError);
    CHECK_THROWS_AS(SlangDict(Entries{{"  ", "x"}}), ParseError);
    CHECK(SlangDict(Entries{{"LOL", "laughing"}}).Contains("lol"));
    CHECK_THROWS_AS(SlangDict::Load(WriteTemp("bad_slang.tsv", "lol laughing\n")), ParseError);
    CHECK_THROWS_AS(SlangDict::Load("/nonexistent/slang.tsv"), DataError);
  }
}

TEST_CASE("no output token is a key whose expansion holds no keys") {
  const SlangDict dict({{"lol", "laughing out loud"}, {"u", "you"}, {"ur", "your"},
                        {"gr8", "great"}});
  std::mt19937_64 rng(7);
  const Tokens vocab = {"lol", "u", "ur", "gr8", "the", "you", "great", "cat"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1), len(0, 10);
  for (int trial = 0; trial < 500; ++trial) {
    Tokens tokens;
    for (std::size_t i = len(rng); i > 0; --i) tokens.push_back(vocab[pick(rng)]);
    for (const std::string& t : NormalizeSlang(tokens, dict)) CHECK_FALSE(dict.Contains(t));
  }
}

TEST_CASE("stopword removal") {
  const StopwordSet stops = StopwordSet::Load(kData / "stopwords.txt");
  CHECK(stops.size() == 25);
  CHECK(RemoveStopwords({"the", "gender", "pay", "gap", "is", "a", "myth"}, stops) ==
        Tokens{"gender", "pay", "gap", "myth"});
  CHECK(RemoveStopwords({"the", "a", "is"}, stops) == Tokens{"the", "a", "is"});
  CHECK(RemoveStopwords({}, stops).empty());

  const auto path = WriteTemp("stops.txt", "# comment\nThe\n\n  of \n");
  const StopwordSet custom = StopwordSet::Load(path);
  CHECK(custom.size() == 2);
  CHECK(custom.Contains("the"));
  CHECK_FALSE(custom.Contains("# comment"));

  std::mt19937_64 rng(1);
  const Tokens pool = {"the", "a", "is", "of", "cat", "dog"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), len(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    Tokens tokens;
    for (std::size_t i = len(rng); i > 0; --i) tokens.push_back(pool[pick(rng)]);
    CHECK_FALSE(RemoveStopwords(tokens, stops).empty());
  }
}

TEST_CASE("clean") {
  const TextPrep prep = TextPrep::FromDirectory(kData, true);
  CHECK(prep.Clean("lol the Gender Pay Gap is a myth") ==
        Tokens{"laughing", "out", "loud", "gender", "pay", "gap", "myth"});
  CHECK(Clean("lol the myth", prep.slang, prep.stopwords, false) ==
        Tokens{"lol", "the", "myth"});
  // Slang runs before stopword removal: "u r" -> "you are" -> "you".
  CHECK(prep.Clean("u r") == Tokens{"you"});
  CHECK(prep.Clean("Be still. Be patient.") == Tokens{"still", "patient"});

  TextPrep off = prep;
  off.enabled = false;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string text = RandomText(rng);
    CHECK(off.Clean(text) == off.Clean(text));
    CHECK(off.Clean(Join(off.Clean(text))) == off.Clean(text));
    CHECK(prep.Clean(text) == prep.Clean(text));
  }
}
