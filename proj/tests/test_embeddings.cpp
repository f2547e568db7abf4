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

#include <sstream>

#include <doctest.h>

#include "dact/embeddings.hpp"
#include "util.hpp"

using namespace dact;

namespace {

VectorMap parse(const std::string& text) {
  std::istringstream in(text);
  return load_vectors(in, "fixture");
}

Vocabulary vocab_of(const std::vector<std::string>& tokens) { return Vocabulary(tokens, tokens.size()); }

}  // namespace

TEST_SUITE("embeddings") {
  TEST_CASE("with and without header") {
    const auto a = parse("2 3\na 1 0 0\nb 0 1 0\n");
    REQUIRE(a.size() == 2);
    CHECK(a.at("a") == Eigen::Vector3d(1, 0, 0));
    CHECK(a.at("b") == Eigen::Vector3d(0, 1, 0));
    CHECK(parse("a 1 0 0\nb 0 1 0\n") == a);
  }

  TEST_CASE("dimension and number errors") {
    CHECK_THROWS_AS(parse("2 3\na 1 0 0\nb 0 1\n"), ParseError);
    CHECK_THROWS_AS(parse("a 1 0 0\nb 0 1\n"), ParseError);
    try {
      parse("a 1 0 0\nb 0 x 1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  TEST_CASE("save and load round trip exactly") {
    const auto dir = testutil::scratch("emb");
    VectorMap v{{"x", Eigen::Vector2d(0.1, -1.0 / 3.0)}, {"y", Eigen::Vector2d(1e-300, 12345.678)}};
    save_vectors(v, dir / "v.vec");
    CHECK(load_vectors(dir / "v.vec") == v);
  }

  TEST_CASE("hits are copied, PAD is zero, misses are seeded uniform") {
    const auto vocab = vocab_of({"a", "b"});
    const VectorMap vecs{{"a", Eigen::Vector3d(1, 0, 0)}};
    const auto m = build_matrix(vocab, vecs, 3, EmbeddingMode::kStatic, 9);
    CHECK(m.rows() == 4);
    CHECK(m.matrix.row(kPadIndex).isZero(0));
    CHECK(m.matrix.row(vocab.index_of("a")) == Eigen::RowVector3d(1, 0, 0));
    CHECK(m.matrix.row(vocab.index_of("b")).cwiseAbs().maxCoeff() <= 0.25);
    CHECK(m.matrix.row(kUnkIndex).cwiseAbs().maxCoeff() <= 0.25);
    CHECK(!m.trainable());
    CHECK(build_matrix(vocab, vecs, 3, EmbeddingMode::kTrainable, 9).matrix == m.matrix);
    CHECK(build_matrix(vocab, vecs, 3, EmbeddingMode::kStatic, 10).matrix != m.matrix);
  }

  TEST_CASE("no hits stay inside the init range") {
    std::vector<std::string> tokens;
    for (int i = 0; i < 500; ++i) tokens.push_back("t" + std::to_string(i));
    const auto m = build_matrix(vocab_of(tokens), {}, 16, EmbeddingMode::kStatic, 4);
    CHECK(m.matrix.bottomRows(m.rows() - 1).cwiseAbs().maxCoeff() <= 0.25);
    CHECK(m.matrix.bottomRows(m.rows() - 1).cwiseAbs().maxCoeff() > 0.2);
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(build_matrix(vocab_of({"a"}), {{"a", Eigen::Vector2d(1, 1)}}, 3, EmbeddingMode::kStatic, 1),
                    DataError);
  }
}
