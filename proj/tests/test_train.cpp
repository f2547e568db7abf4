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

#include <cstdlib>
#include <random>
#include <sstream>

#include <doctest.h>

#include "dact/synthgen.hpp"
#include "dact/train.hpp"
#include "util.hpp"

using namespace dact;

namespace {

struct Setup {
  ModelConfig model;
  EmbeddingMatrix embeddings;
  std::vector<Sample> samples;
};

Setup separable(Architecture arch, Index utterances, EmbeddingMode mode = EmbeddingMode::kStatic) {
  const auto spec = separable_spec(4, utterances, 20, 3);
  const auto data = generate(spec);
  Setup s;
  s.model.architecture = arch;
  s.model.window = 10;
  s.model.emb_dim = spec.emb_dim;
  s.model.tag_count = static_cast<Index>(data.train1.tag_set.size());
  s.model.embedding_mode = mode;
  const auto vocab = build_vocab(data.train1, 1000);
  s.embeddings = build_matrix(vocab, data.vectors1, spec.emb_dim, mode, 1);
  s.samples = make_samples(data.train1, vocab, s.model.window, data.train1.tag_set);
  return s;
}

TrainConfig quick(int epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.seeds = {1};
  return t;
}

Corpus parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("same seed gives bit-identical parameters") {
    auto s = separable(Architecture::kBiLstm, 60);
    auto a = train<double>(s.model, s.embeddings, s.samples, quick(2));
    auto b = train<double>(s.model, s.embeddings, s.samples, quick(2));
    const auto pa = a.graph.parameters(), pb = b.graph.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
    CHECK(a.log.size() == 2);
    s.model.seed = 2;
    auto c = train<double>(s.model, s.embeddings, s.samples, quick(2));
    CHECK(c.graph.parameters().back()->value != pa.back()->value);
  }

  TEST_CASE("initial loss is close to ln K on a balanced batch") {
    for (auto arch : {Architecture::kCnn1, Architecture::kCnn2, Architecture::kBiLstm}) {
      const auto s = separable(arch, 200);
      auto graph = build_model<double>(s.model, s.embeddings);
      // Equal number of samples per class.
      std::vector<std::size_t> order;
      std::vector<int> per_class(static_cast<std::size_t>(s.model.tag_count), 0);
      for (std::size_t i = 0; i < s.samples.size(); ++i)
        if (per_class[static_cast<std::size_t>(s.samples[i].target)]++ < 8) order.push_back(i);
      const auto batch = make_batch(s.samples, order, 0, order.size());
      const double k = static_cast<double>(s.model.tag_count);
      CHECK(graph.loss(batch) == doctest::Approx(std::log(k)).epsilon(0.10));
    }
  }

  TEST_CASE("static embeddings never change, trainable ones do, PAD stays zero") {
    auto s = separable(Architecture::kCnn1, 60);
    auto frozen = train<double>(s.model, s.embeddings, s.samples, quick(2));
    CHECK(frozen.graph.embedding().table().value == s.embeddings.matrix);

    auto t = separable(Architecture::kCnn1, 60, EmbeddingMode::kTrainable);
    TrainConfig one = quick(1);
    one.batch_size = 1000;   // a single step
    auto tuned = train<double>(t.model, t.embeddings, t.samples, one);
    const auto& table = tuned.graph.embedding().table().value;
    CHECK(table.row(kPadIndex).isZero(0));
    CHECK((table.bottomRows(table.rows() - 1) - t.embeddings.matrix.bottomRows(table.rows() - 1)).cwiseAbs().maxCoeff() > 0);
    auto longer = train<double>(t.model, t.embeddings, t.samples, quick(3));
    CHECK(longer.graph.embedding().table().value.row(kPadIndex).isZero(0));
  }

  TEST_CASE("separable data is fitted within 30 epochs with a non-increasing loss") {
    for (auto arch : {Architecture::kCnn1, Architecture::kCnn2, Architecture::kBiLstm}) {
      const auto s = separable(arch, 50);
      auto r = train<double>(s.model, s.embeddings, s.samples, quick(30));
      INFO(to_string(arch));
      CHECK(sample_accuracy(r.graph, s.samples) == 1.0);
      int increases = 0;
      for (std::size_t e = 1; e < r.log.size(); ++e) increases += r.log[e].loss > r.log[e - 1].loss + 1e-12;
      CHECK(increases <= 1);
    }
  }

  TEST_CASE("pooled tag set covers every language") {
    const auto en = parse_text("e\t0\ten\tgreet\thello\ne\t1\ten\tbye\tbye\n");
    const auto de = parse_text("g\t0\tde\tgreet\thallo\ng\t1\tde\tthanks\tdanke\n");
    const auto tags = pooled_tag_set({en, de});
    CHECK(tags == std::vector<std::string>{"bye", "greet", "thanks"});
    const auto vocab = build_union_vocab({en, de}, 10);
    CHECK(make_samples(de, vocab, 3, tags).size() == 2);
    CHECK_THROWS_AS(make_samples(de, vocab, 3, pooled_tag_set({en})), DataError);
    const auto s = make_samples(en, vocab, 3, tags);
    CHECK(s[0].previous == -1);
    CHECK(s[1].previous == s[0].target);
  }

  TEST_CASE("non-finite values report the step") {
    auto s = separable(Architecture::kCnn1, 40);
    s.embeddings.matrix(2, 0) = std::nan("");
    try {
      train<double>(s.model, s.embeddings, s.samples, quick(1));
      FAIL("expected a numeric error");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("step 0") != std::string::npos);
    }
  }

  TEST_CASE("config checks and JSON round trip") {
    TrainConfig t;
    t.learning_rate = 0;
    CHECK_THROWS_AS(t.validate(), DataError);
    t = TrainConfig{};
    t.seeds.clear();
    CHECK_THROWS_AS(t.validate(), DataError);
    t = TrainConfig{};
    t.batch_size = 0;
    CHECK_THROWS_AS(t.validate(), DataError);
    t = TrainConfig{};
    t.seeds = {4, 2};
    t.epochs = 7;
    CHECK(to_json(train_config_from_json(to_json(t))) == to_json(t));
    CHECK(TrainConfig{}.seeds.size() == 10);
  }

  TEST_CASE("holdout keeps the best snapshot") {
    const auto s = separable(Architecture::kCnn1, 80);
    TrainConfig t = quick(5);
    t.holdout_fraction = 0.25;
    const auto r = train<double>(s.model, s.embeddings, s.samples, t);
    for (const auto& e : r.log) CHECK(e.holdout_accuracy >= 0.0);
  }

  TEST_CASE("protocol aggregation") {
    auto one = aggregate_runs({{3, {0.5, 0.25}}});
    CHECK(one.mean.accuracy == 0.5);
    CHECK(one.stddev.accuracy == 0.0);
    CHECK(one.stddev.macro_f1 == 0.0);

    std::vector<RunMetrics> runs;
    for (std::uint64_t s = 1; s <= 10; ++s) runs.push_back({s, {0.1 * static_cast<double>(s), 0.05 * static_cast<double>(s)}});
    auto shuffled = runs;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
    const auto a = aggregate_runs(runs), b = aggregate_runs(shuffled);
    CHECK(format_protocol_csv(a) == format_protocol_csv(b));
    CHECK(a.mean.accuracy == doctest::Approx(0.55));
    CHECK(a.stddev.accuracy == doctest::Approx(std::sqrt(82.5 / 9.0) * 0.1));
    std::istringstream lines(format_protocol_csv(a));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 1 + 10 + 2);
  }

  TEST_CASE("run_protocol is independent of the worker count and seed order") {
    const auto s = separable(Architecture::kCnn1, 40);
    TrainConfig t = quick(2);
    t.seeds = {3, 1, 2};
    std::function<Metrics(nn::LayerGraph<double>&)> eval = [&](nn::LayerGraph<double>& g) {
      return Metrics{sample_accuracy(g, s.samples), 0.0};
    };
    setenv("DACT_THREADS", "1", 1);
    CHECK(worker_threads() == 1);
    const auto serial = run_protocol<double>(s.model, s.embeddings, s.samples, t, eval);
    setenv("DACT_THREADS", "3", 1);
    t.seeds = {2, 3, 1};
    const auto parallel = run_protocol<double>(s.model, s.embeddings, s.samples, t, eval);
    unsetenv("DACT_THREADS");
    CHECK(format_protocol_csv(serial) == format_protocol_csv(parallel));
    CHECK(serial.runs.front().seed == 1);
    auto single = t;
    single.seeds = {2};
    const auto r = run_protocol<double>(s.model, s.embeddings, s.samples, single, eval);
    CHECK(r.mean.accuracy == r.runs[0].metrics.accuracy);
    CHECK(r.stddev.accuracy == 0.0);
  }

  TEST_CASE("training log CSV") {
    const auto dir = testutil::scratch("trainlog");
    write_training_log({{1, 0.5, 0.25}, {2, 0.125, 1.0}}, dir / "log.csv");
    CHECK(testutil::read_file(dir / "log.csv") == "epoch,loss,train_accuracy\n1,0.5,0.25\n2,0.125,1\n");
  }
}
