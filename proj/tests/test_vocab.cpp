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
#include <set>
#include <sstream>

#include <doctest.h>

#include "dact/vocab.hpp"
#include "util.hpp"

using namespace dact;

namespace {

Corpus corpus_of(const std::vector<std::string>& utterances, const std::string& lang = "en") {
  std::ostringstream text;
  for (std::size_t i = 0; i < utterances.size(); ++i) text << "d\t" << i << '\t' << lang << "\tt\t" << utterances[i] << '\n';
  std::istringstream in(text.str());
  return parse_corpus(in);
}

}  // namespace

TEST_SUITE("vocab") {
  TEST_CASE("top-cap by count") {
    const auto v = build_vocab(corpus_of({"a a a b b c"}), 2);
    CHECK(v.entries() == std::vector<std::string>{kPadToken, kUnkToken, "a", "b"});
    CHECK(v.size_cap() == 2);
  }

  TEST_CASE("ties break lexicographically") {
    CHECK(build_vocab(corpus_of({"b a b a"}), 1).entries() == std::vector<std::string>{kPadToken, kUnkToken, "a"});
  }

  TEST_CASE("cap larger than the token count") {
    CHECK(build_vocab(corpus_of({"x y"}), 10000).size() == 4);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(build_vocab(Corpus{}, 5), DataError);
    CHECK_THROWS_AS(build_vocab(corpus_of({"a"}), 0), DataError);
    CHECK_THROWS_AS(build_union_vocab({}, 5), DataError);
  }

  TEST_CASE("union vocabulary") {
    const auto v = build_union_vocab({corpus_of({"hello"}), corpus_of({"hallo"}, "de")}, 10);
    CHECK(v.entries() == std::vector<std::string>{kPadToken, kUnkToken, "hallo", "hello"});
    const auto shared = build_union_vocab({corpus_of({"in in x"}), corpus_of({"in y"}, "de")}, 10);
    CHECK(std::count(shared.entries().begin(), shared.entries().end(), "in") == 1);
    CHECK(shared.entries()[2] == "in");
  }

  TEST_CASE("disjoint per-language caps add up") {
    std::string en, de;
    for (int i = 0; i < 300; ++i) {
      en += " e" + std::to_string(i);
      de += " g" + std::to_string(i);
    }
    const auto v = build_union_vocab({corpus_of({en}), corpus_of({de}, "de")}, 300);
    CHECK(v.size() == 602);
  }

  TEST_CASE("union holds every per-language entry exactly once") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> word(0, 60), len(1, 12);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Corpus> corpora;
      for (int l = 0; l < 3; ++l) {
        std::vector<std::string> utts;
        for (int u = 0; u < 10; ++u) {
          std::string s;
          for (int k = len(rng); k > 0; --k) s += " w" + std::to_string(word(rng));
          utts.push_back(s);
        }
        corpora.push_back(corpus_of(utts, "l" + std::to_string(l)));
      }
      const auto uni = build_union_vocab(corpora, 15);
      std::set<std::string> seen(uni.entries().begin(), uni.entries().end());
      CHECK(seen.size() == uni.size());
      for (const auto& c : corpora) {
        const auto single = build_vocab(c, 15);
        for (const auto& t : single.entries()) CHECK(uni.contains(t));
      }
      CHECK(build_union_vocab(corpora, 15) == uni);
    }
  }

  TEST_CASE("encode and decode") {
    const auto v = build_vocab(corpus_of({"a a a b b c"}), 2);
    CHECK(encode(v, {"a", "b", kPadToken}) == std::vector<int>{2, 3, 0});
    CHECK(encode(v, {"q", "r"}) == std::vector<int>{1, 1});
    const std::vector<std::string> known{"b", "a", "a"};
    CHECK(decode(v, encode(v, known)) == known);
    for (int i : encode(v, {"a", "zz", kPadToken, "c"})) CHECK(i < static_cast<int>(v.size()));
  }

  TEST_CASE("file round trip") {
    const auto dir = testutil::scratch("vocab");
    const auto v = build_vocab(corpus_of({"a a a b b c"}), 10);
    save_vocab(v, dir / "v.txt");
    CHECK(testutil::read_file(dir / "v.txt").rfind("<PAD>\n<UNK>\n", 0) == 0);
    CHECK(load_vocab(dir / "v.txt") == v);
    testutil::write_file(dir / "bad.txt", "<UNK>\n<PAD>\na\n");
    CHECK_THROWS(load_vocab(dir / "bad.txt"));
  }
}
