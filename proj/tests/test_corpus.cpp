// Copyright 2026 The dact Authors.
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

#include <random>
#include <sstream>

#include <doctest.h>

#include "dact/corpus.hpp"

using namespace dact;

namespace {

const char* kTwoLines = "d1\t0\ten\tgreet\thello there\nd1\t1\ten\tbye\tgood bye\n";

Corpus parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in, "fixture");
}

Corpus random_corpus(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dialogues(1, 6), turns(1, 7), len(1, 9), word(0, 30), tag(0, 5);
  std::ostringstream text;
  const int n = dialogues(rng);
  for (int d = 0; d < n; ++d) {
    const int t = turns(rng);
    for (int i = 0; i < t; ++i) {
      text << "dlg" << d << '\t' << i << '\t' << (d % 2 ? "de" : "en") << "\ttag" << tag(rng) << '\t';
      const int l = len(rng);
      for (int k = 0; k < l; ++k) text << (k ? " " : "") << 'w' << word(rng);
      text << '\n';
    }
  }
  return parse_text(text.str());
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("two-line fixture") {
    const auto c = parse_text(kTwoLines);
    REQUIRE(c.dialogues.size() == 1);
    CHECK(c.dialogues[0].utterances.size() == 2);
    CHECK(c.tag_set == std::vector<std::string>{"bye", "greet"});
    CHECK(c.languages == std::set<std::string>{"en"});
    CHECK(c.dialogues[0].utterances[1].tokens == std::vector<std::string>{"good", "bye"});
    const auto s = compute_stats(c);
    CHECK(s.dialogue_count == 1);
    CHECK(s.da_count == 2);
    CHECK(s.word_count == 4);
  }

  TEST_CASE("file order does not matter") {
    CHECK(parse_text(kTwoLines) == parse_text("d1\t1\ten\tbye\tgood bye\nd1\t0\ten\tgreet\thello there\n"));
  }

  TEST_CASE("malformed lines name the line") {
    try {
      parse_text("# header\nd1\t0\ten\tgreet\thello\nd1\t1\ten\tbye\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_text("d1\tx\ten\tgreet\thello\n"), ParseError);
    CHECK_THROWS_AS(parse_text("d1\t0\ten\tgreet\t   \n"), ParseError);
    CHECK_THROWS_AS(parse_text("d1\t0\ten\tgreet\thi\nd1\t0\ten\tbye\tbye\n"), ParseError);
    CHECK_THROWS_AS(parse_text(""), ParseError);
    CHECK_THROWS_AS(parse_text("# only a comment\n\n"), ParseError);
  }

  TEST_CASE("text is lowercased and whitespace-split") {
    const auto c = parse_text("d\t0\ten\tx\t Hello  WORLD \v again\r\n");
    CHECK(c.dialogues[0].utterances[0].tokens == std::vector<std::string>{"hello", "world", "again"});
    CHECK(tokenize("  A b\tC ") == std::vector<std::string>{"a", "b", "c"});
  }

  TEST_CASE("empty corpus stats are zero") {
    const auto s = compute_stats(Corpus{});
    CHECK(s.dialogue_count == 0);
    CHECK(s.da_count == 0);
    CHECK(s.word_count == 0);
    CHECK(s.tag_histogram.empty());
  }

  TEST_CASE("window pads on the right and truncates") {
    const std::vector<std::string> abc{"a", "b", "c"};
    CHECK(window(abc, 5) == std::vector<std::string>{"a", "b", "c", kPadToken, kPadToken});
    std::vector<std::string> twenty;
    for (int i = 0; i < 20; ++i) twenty.push_back("t" + std::to_string(i));
    const auto w15 = window(twenty, 15);
    CHECK(w15 == std::vector<std::string>(twenty.begin(), twenty.begin() + 15));
    CHECK(window(w15, 15) == w15);
  }

  TEST_CASE("window length and idempotence, random inputs") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(0, 30), w(1, 20);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::string> tokens(static_cast<std::size_t>(len(rng)), "x");
      const auto width = static_cast<std::size_t>(w(rng));
      const auto once = window(tokens, width);
      CHECK(once.size() == width);
      CHECK(window(once, width) == once);
    }
  }

  TEST_CASE("serialize then parse is the identity") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const auto c = random_corpus(rng);
      std::ostringstream out;
      serialize_corpus(c, out);
      CHECK(parse_text(out.str()) == c);
    }
  }

  TEST_CASE("histogram totals equal the utterance count") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
      const auto c = random_corpus(rng);
      const auto s = compute_stats(c);
      std::size_t total = 0, words = 0;
      for (const auto& [tag, n] : s.tag_histogram) total += n;
      for (const auto& d : c.dialogues)
        for (const auto& u : d.utterances) words += u.tokens.size();
      CHECK(total == s.da_count);
      CHECK(words == s.word_count);
      CHECK(s.tag_histogram.size() == c.tag_set.size());
    }
  }

  TEST_CASE("merging keeps ids unique and pools tags") {
    auto en = parse_text("d1\t0\ten\ta\tx\n");
    auto de = parse_text("d1\t0\tde\tb\ty\n");
    const auto m = merge_corpora({en, de});
    CHECK(m.dialogues.size() == 2);
    CHECK(m.tag_set == std::vector<std::string>{"a", "b"});
    CHECK(m.languages == std::set<std::string>{"de", "en"});
  }
}
