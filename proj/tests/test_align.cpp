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

#include <doctest.h>

#include "dact/align.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace dact;

namespace {

Eigen::MatrixXd gaussian(long rows, long cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

}  // namespace

TEST_SUITE("align") {
  TEST_CASE("orthogonal map is recovered") {
    std::mt19937_64 rng(21);
    const Eigen::MatrixXd x = gaussian(500, 20, rng);
    const Eigen::MatrixXd q = oracle::orthogonal(20, rng);
    const Eigen::MatrixXd y = x * q;
    const auto model = fit_cca(x, y, 1e-8);
    CHECK(model.correlations.minCoeff() >= 0.999);
    CHECK(model.correlations.maxCoeff() <= 1.0);
    for (long k = 1; k < model.correlations.size(); ++k) CHECK(model.correlations(k) <= model.correlations(k - 1));
    double err = 0.0;
    for (long i = 0; i < x.rows(); ++i) {
      const Eigen::VectorXd expected = (x.row(i) * q).transpose();
      err += (project(model, Eigen::VectorXd(x.row(i).transpose())) - expected).norm() / expected.norm();
    }
    CHECK(err / static_cast<double>(x.rows()) <= 1e-3);
  }

  TEST_CASE("correlations equal Pearson correlations of the canonical variates") {
    std::mt19937_64 rng(22);
    const Eigen::MatrixXd x = gaussian(400, 6, rng);
    const Eigen::MatrixXd y = x * gaussian(6, 6, rng) + gaussian(400, 6, rng, 2.0);
    const auto model = fit_cca(x, y, 1e-10);
    const Eigen::MatrixXd u = x * model.w_src, v = y * model.w_piv;
    for (long k = 0; k < 6; ++k)
      CHECK(oracle::pearson(u.col(k), v.col(k)) == doctest::Approx(model.correlations(k)).epsilon(1e-8));
  }

  TEST_CASE("self alignment acts as the identity") {
    std::mt19937_64 rng(23);
    const Eigen::MatrixXd x = gaussian(300, 8, rng);
    const auto model = fit_cca(x, x, 1e-12);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd v = gaussian(8, 1, rng);
      CHECK((project(model, v) - v).norm() <= 1e-6 * v.norm());
    }
  }

  TEST_CASE("independent noise is uncorrelated") {
    std::mt19937_64 rng(24);
    const auto model = fit_cca(gaussian(5000, 10, rng), gaussian(5000, 10, rng));
    CHECK(model.correlations.maxCoeff() < 0.5);
  }

  TEST_CASE("centering identities") {
    std::mt19937_64 rng(25);
    Eigen::MatrixXd x = gaussian(100, 5, rng), y = gaussian(100, 5, rng) + x;
    const auto model = fit_cca(x, y);
    CHECK(project(model, model.mean_src) == model.mean_piv);
    x.rowwise() -= x.colwise().mean();
    y.rowwise() -= y.colwise().mean();
    const auto centred = fit_cca(x, y);
    CHECK(project(centred, Eigen::VectorXd::Zero(5)).norm() <= 1e-12);
  }

  TEST_CASE("affine reparameterization of one side keeps the correlations") {
    std::mt19937_64 rng(26);
    const Eigen::MatrixXd x = gaussian(500, 8, rng);
    const Eigen::MatrixXd y = x * gaussian(8, 8, rng) + gaussian(500, 8, rng);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(8, 8) + 0.3 * gaussian(8, 8, rng);
    const Eigen::RowVectorXd b = gaussian(1, 8, rng, 5.0);
    const Eigen::MatrixXd x2 = (x * a).rowwise() + b;
    const auto base = fit_cca(x, y, 1e-12);
    const auto moved = fit_cca(x2, y, 1e-12);
    CHECK((base.correlations - moved.correlations).cwiseAbs().maxCoeff() < 1e-6);
    const auto swapped = fit_cca(y, x, 1e-12);
    CHECK((base.correlations - swapped.correlations).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("signs are canonical and fits are deterministic") {
    std::mt19937_64 rng(27);
    const Eigen::MatrixXd x = gaussian(200, 5, rng), y = x + gaussian(200, 5, rng);
    const auto a = fit_cca(x, y), b = fit_cca(x, y);
    CHECK(a.w_src == b.w_src);
    CHECK(a.transform == b.transform);
    for (long k = 0; k < a.w_src.cols(); ++k) {
      Eigen::Index arg;
      a.w_src.col(k).cwiseAbs().maxCoeff(&arg);
      CHECK(a.w_src(arg, k) > 0.0);
    }
    CHECK(fit_cca(x, y, std::nullopt, 3).correlations.size() == 3);
  }

  TEST_CASE("input errors") {
    CHECK_THROWS_AS(fit_cca(Eigen::MatrixXd::Ones(1, 3), Eigen::MatrixXd::Ones(1, 3)), DataError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Random(10, 3);
    bad(2, 1) = std::nan("");
    CHECK_THROWS_AS(fit_cca(bad, Eigen::MatrixXd::Random(10, 3)), DataError);
    CHECK_THROWS_AS(fit_cca(Eigen::MatrixXd::Random(10, 3), Eigen::MatrixXd::Random(9, 3)), DataError);
    const auto model = fit_cca(Eigen::MatrixXd::Random(10, 3), Eigen::MatrixXd::Random(10, 3));
    CHECK_THROWS_AS(project(model, Eigen::VectorXd::Zero(4)), DataError);
  }

  TEST_CASE("project_corpus keeps PAD and forces static") {
    std::mt19937_64 rng(28);
    const Eigen::MatrixXd x = gaussian(100, 4, rng);
    const auto model = fit_cca(x, Eigen::MatrixXd(x * oracle::orthogonal(4, rng)));
    EmbeddingMatrix m{gaussian(6, 4, rng), EmbeddingMode::kTrainable};
    m.matrix.row(0).setZero();
    const auto p = project_corpus(model, m);
    CHECK(p.mode == EmbeddingMode::kStatic);
    CHECK(p.matrix.row(0).isZero(0));
    for (long r = 1; r < 6; ++r) {
      const Eigen::VectorXd one = project(model, Eigen::VectorXd(m.matrix.row(r).transpose()));
      CHECK((p.matrix.row(r).transpose() - one).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("lexicon files and usable pairs") {
    const auto dir = testutil::scratch("align");
    testutil::write_file(dir / "lex.tsv", "# de\ten\nhund\tdog\nkatze\tcat\nmaus\tmouse\n");
    const auto lex = load_lexicon(dir / "lex.tsv");
    REQUIRE(lex.pairs.size() == 3);
    CHECK(lex.pairs[0] == std::pair<std::string, std::string>{"hund", "dog"});
    CHECK(load_lexicon(dir / "lex.tsv", true).pairs[0] == std::pair<std::string, std::string>{"dog", "hund"});
    save_lexicon(lex, dir / "copy.tsv");
    CHECK(load_lexicon(dir / "copy.tsv").pairs == lex.pairs);
    const VectorMap de{{"hund", Eigen::Vector2d(1, 0)}, {"katze", Eigen::Vector2d(0, 1)}};
    const VectorMap en{{"dog", Eigen::Vector2d(2, 0)}, {"mouse", Eigen::Vector2d(0, 3)}};
    const auto pairs = lexicon_matrices(lex, de, en);
    CHECK(pairs.dropped == 2);
    CHECK(pairs.source.rows() == 1);
    testutil::write_file(dir / "bad.tsv", "a b\n");
    CHECK_THROWS_AS(load_lexicon(dir / "bad.tsv"), ParseError);
  }

  TEST_CASE("CCA model file round trip") {
    std::mt19937_64 rng(29);
    const Eigen::MatrixXd x = gaussian(50, 3, rng);
    const auto model = fit_cca(x, Eigen::MatrixXd(x + gaussian(50, 3, rng)));
    const auto dir = testutil::scratch("cca");
    save_cca(model, dir / "m.json");
    const auto back = load_cca(dir / "m.json");
    CHECK(back.transform == model.transform);
    CHECK(back.mean_src == model.mean_src);
    CHECK(back.correlations == model.correlations);
    CHECK(back.ridge == model.ridge);
  }
}
