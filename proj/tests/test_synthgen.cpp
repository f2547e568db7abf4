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

#include <map>
#include <set>
#include <sstream>

#include <doctest.h>

#include "dact/synthgen.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace dact;

namespace {

using Key = std::vector<std::string>;

// Tag counts per distinct token sequence.
std::map<Key, std::map<std::string, int>> emissions(const Corpus& c) {
  std::map<Key, std::map<std::string, int>> out;
  for (const auto& d : c.dialogues)
    for (const auto& u : d.utterances) ++out[u.tokens][u.da_tag];
  return out;
}

// Accuracy of the best classifier that sees only the tokens, restricted to `tags`.
double bayes_without_history(const Corpus& c, const std::set<std::string>& tags) {
  int best = 0, total = 0;
  for (const auto& [tokens, counts] : emissions(c)) {
    int top = 0;
    for (const auto& [tag, n] : counts) top = std::max(top, n);
    for (const auto& [tag, n] : counts)
      if (tags.count(tag)) {
        total += n;
        if (n == top) best += n;
      }
  }
  return static_cast<double>(best) / static_cast<double>(total);
}

}  // namespace

TEST_SUITE("synthgen") {
  TEST_CASE("same seed, same bytes") {
    const auto spec = separable_spec(5, 120, 40, 9);
    const auto a = testutil::scratch("synth_a"), b = testutil::scratch("synth_b");
    write_synth(generate(spec), spec, a);
    write_synth(generate(spec), spec, b);
    for (const auto& f : {"en_train.tsv", "en_test.tsv", "de_train.tsv", "de_test.tsv", "en.vec", "de.vec",
                          "lexicon.tsv", "data.json"})
      CHECK(testutil::read_file(a / f) == testutil::read_file(b / f));
    auto other = spec;
    other.seed = 10;
    const auto c = testutil::scratch("synth_c");
    write_synth(generate(other), other, c);
    CHECK(testutil::read_file(a / "en_train.tsv") != testutil::read_file(c / "en_train.tsv"));
  }

  TEST_CASE("generated files parse back unchanged") {
    const auto spec = ambiguity_spec(5, 100, 30, 2);
    const auto data = generate(spec);
    const auto dir = testutil::scratch("synth_rt");
    write_synth(data, spec, dir);
    CHECK(parse_corpus(dir / "en_train.tsv") == data.train1);
    CHECK(parse_corpus(dir / "de_test.tsv") == data.test2);
    CHECK(load_vectors(dir / "en.vec") == data.vectors1);
    CHECK(load_lexicon(dir / "lexicon.tsv").pairs == data.lexicon.pairs);
    CHECK(data.train1.utterance_count() == 100);
    CHECK(data.test1.utterance_count() == 30);
  }

  TEST_CASE("language 2 is a token bijection of language 1 with rotated vectors") {
    auto spec = separable_spec(4, 80, 20, 4);
    const auto data = generate(spec);
    std::map<std::string, std::string> to_l1;
    for (const auto& [l2, l1] : data.lexicon.pairs) CHECK(to_l1.emplace(l2, l1).second);
    CHECK(to_l1.size() == static_cast<std::size_t>(spec.vocab_size));
    for (std::size_t d = 0; d < data.train1.dialogues.size(); ++d) {
      const auto& u1 = data.train1.dialogues[d].utterances;
      const auto& u2 = data.train2.dialogues[d].utterances;
      REQUIRE(u1.size() == u2.size());
      for (std::size_t t = 0; t < u1.size(); ++t) {
        CHECK(u1[t].da_tag == u2[t].da_tag);
        for (std::size_t i = 0; i < u1[t].tokens.size(); ++i) CHECK(to_l1.at(u2[t].tokens[i]) == u1[t].tokens[i]);
      }
    }
    const Eigen::MatrixXd q = data.rotation;
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(spec.emb_dim, spec.emb_dim)).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& [l2, l1] : data.lexicon.pairs) {
      const Eigen::VectorXd want = q.transpose() * data.vectors1.at(l1);
      CHECK((data.vectors2.at(l2) - want).norm() < 1e-12);
    }
  }

  TEST_CASE("separable preset: one tag per token sequence") {
    const auto data = generate(separable_spec(5, 2000, 10, 5));
    for (const auto& [tokens, counts] : emissions(data.train1)) CHECK(counts.size() == 1);
  }

  TEST_CASE("ambiguity preset: Bayes bounds") {
    const auto spec = ambiguity_spec(5, 4000, 10, 6);
    const auto data = generate(spec);
    const std::set<std::string> ambiguous{data.tags[0], data.tags[2]};
    // Without history the two tags are indistinguishable and equally frequent.
    CHECK(bayes_without_history(data.train1, ambiguous) == doctest::Approx(0.5).epsilon(0.06));
    // With the previous tag the successor is deterministic.
    std::map<std::string, std::set<std::string>> successors;
    for (const auto& d : data.train1.dialogues) {
      CHECK(d.utterances.front().da_tag != data.tags[0]);
      CHECK(d.utterances.front().da_tag != data.tags[2]);
      for (std::size_t t = 1; t < d.utterances.size(); ++t)
        successors[d.utterances[t - 1].da_tag].insert(d.utterances[t].da_tag);
    }
    for (const auto& [tag, next] : successors) CHECK(next.size() == 1);
    CHECK(data.templates[0] == data.templates[2]);
  }

  TEST_CASE("empirical tag distribution approaches the stationary distribution") {
    auto spec = separable_spec(4, 10000, 0, 8);
    spec.transitions.resize(4, 4);
    spec.transitions << 0.1, 0.6, 0.2, 0.1,  //
        0.3, 0.1, 0.5, 0.1,                  //
        0.25, 0.25, 0.25, 0.25,              //
        0.7, 0.1, 0.1, 0.1;
    const auto data = generate(spec);
    const Eigen::VectorXd pi = oracle::stationary(spec.transitions);
    CHECK((data.stationary - pi).cwiseAbs().maxCoeff() < 1e-4);
    const auto stats = compute_stats(data.train1);
    for (Index k = 0; k < 4; ++k) {
      const double freq = static_cast<double>(stats.tag_histogram.at(data.tags[static_cast<std::size_t>(k)])) / 10000.0;
      CHECK(std::abs(freq - pi(k)) < 0.03);
    }
    const auto cyclic = ambiguity_spec(5, 10, 0, 1);
    CHECK((stationary_distribution(cyclic.transitions) - oracle::stationary(cyclic.transitions)).cwiseAbs().maxCoeff() < 1e-4);
  }

  TEST_CASE("inconsistent specs are rejected") {
    auto s = separable_spec(3, 10, 10, 1);
    s.transitions = Eigen::MatrixXd::Constant(3, 3, 0.5);
    CHECK_THROWS_AS(generate(s), DataError);
    s = separable_spec(3, 10, 10, 1);
    s.ambiguous_pairs = {{0, 3}};
    CHECK_THROWS_AS(generate(s), DataError);
    s = separable_spec(3, 10, 10, 1);
    s.language2 = s.language1;
    CHECK_THROWS_AS(s.validate(), DataError);
    s = separable_spec(1, 10, 10, 1);
    CHECK_THROWS_AS(s.validate(), DataError);
  }

  TEST_CASE("spec JSON round trip") {
    auto s = ambiguity_spec(6, 30, 20, 77);
    s.noise = 0.25;
    s.parallel = false;
    const auto back = synth_spec_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
    CHECK(back.transitions == s.transitions);
    CHECK(back.ambiguous_pairs == s.ambiguous_pairs);
  }

  TEST_CASE("tag names") {
    CHECK(tag_name(0, 16) == "feedback");
    CHECK(tag_name(20, 30) == "act020");
    CHECK(token_name("en", 42) == "en0042");
  }
}
