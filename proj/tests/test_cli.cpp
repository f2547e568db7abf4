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

#include <set>
#include <sstream>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "dact/cli.hpp"
#include "dact/synthgen.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dact");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dact::cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Path -> contents for every regular file under `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testutil::read_file(e.path());
  return files;
}

// Small synthetic corpus plus a tiny-model experiment config under `root`.
fs::path make_experiment(const fs::path& root) {
  const auto data = root / "data";
  fs::create_directories(data);
  auto spec = dact::separable_spec(4, 48, 16, 3);
  spec.emb_dim = 6;
  spec.vocab_size = 60;
  testutil::write_file(root / "spec.json", dact::to_json(spec).dump());
  const auto r = run({"synth", "generate", "--config", (root / "spec.json").string(), "--out", data.string()});
  REQUIRE(r.code == 0);
  const nlohmann::json config = {
      {"data", "data/data.json"},
      {"train_languages", "en"},
      {"test_language", "en"},
      {"model",
       {{"window", 6}, {"emb_dim", 6}, {"cnn1_kernels", 3}, {"cnn2_kernels", 2}, {"lstm_units", 3}, {"hidden_units", 5}}},
      {"train", {{"epochs", 2}, {"seeds", {1, 2}}}},
      {"grid",
       {{"multilingual", {{{"train", "en"}, {"test", "en"}}, {{"train", "de+en"}, {"test", "de"}}}},
        {"crosslingual", {{{"train", "en"}, {"test", "de"}}}}}}};
  testutil::write_file(root / "config.json", config.dump(2));
  return root / "config.json";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("stats prints the three counts") {
    const auto dir = testutil::scratch("cli_stats");
    testutil::write_file(dir / "c.tsv", "d1\t0\ten\tgreet\thello there\nd1\t1\ten\tbye\tgood bye\n");
    const auto r = run({"stats", (dir / "c.tsv").string()});
    CHECK(r.code == 0);
    CHECK(r.out == "dialogue#=1\nDA#=2\nword#=4\n");
  }

  TEST_CASE("exit codes") {
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"train"}).code == 1);
    CHECK(run({"train", "--config", "x.json", "--arch", "rnn"}).code == 1);
    const auto missing = run({"stats", "/nonexistent/dact/corpus.tsv"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("error:") != std::string::npos);
    const auto dir = testutil::scratch("cli_bad");
    testutil::write_file(dir / "bad.tsv", "d1\t0\ten\n");
    CHECK(run({"stats", (dir / "bad.tsv").string()}).code == 2);
    testutil::write_file(dir / "bad.json", "{not json");
    CHECK(run({"train", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()}).code == 2);
  }

  TEST_CASE("train writes its outputs only under --out and replays from the manifest") {
    const auto root = testutil::scratch("cli_train");
    const auto config = make_experiment(root);
    const auto before = snapshot(root);
    const auto out = root / "run";
    const auto r = run({"train", "--config", config.string(), "--out", out.string(), "--arch", "cnn1", "--seed", "4"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("accuracy=", 0) == 0);

    auto after = snapshot(root);
    for (const auto& [name, text] : before) CHECK(after.at(name) == text);
    std::set<std::string> added;
    for (const auto& [name, text] : after)
      if (!before.count(name)) added.insert(name);
    for (const auto& name : added) CHECK(name.rfind("run", 0) == 0);

    const auto manifest = nlohmann::json::parse(testutil::read_file(out / "manifest.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["config"]["model"]["seed"] == 4);
    CHECK(manifest["config"]["model"]["architecture"] == "cnn1");
    for (const auto& name : {"model.ckpt", "vocab.txt", "training_log.csv", "metrics.json", "predictions.tsv",
                             "class_scores.csv"}) {
      CHECK(fs::exists(out / name));
      CHECK(std::find(manifest["outputs"].begin(), manifest["outputs"].end(), name) != manifest["outputs"].end());
    }
    CHECK(manifest.contains("started_at"));
    CHECK(manifest.contains("finished_at"));

    const auto replay = root / "replay";
    REQUIRE(run({"train", "--config", (out / "manifest.json").string(), "--out", replay.string()}).code == 0);
    for (const auto& name : {"model.ckpt", "metrics.json", "predictions.tsv", "training_log.csv"})
      CHECK(testutil::read_file(out / name) == testutil::read_file(replay / name));

    const auto ev = root / "ev";
    const auto e = run({"evaluate", "--config", config.string(), "--model", out.string(), "--out", ev.string()});
    REQUIRE(e.code == 0);
    CHECK(testutil::read_file(ev / "metrics.json") == testutil::read_file(out / "metrics.json"));
  }

  TEST_CASE("protocol with one seed reports zero spread") {
    const auto root = testutil::scratch("cli_protocol");
    const auto config = make_experiment(root);
    const auto out = root / "p";
    REQUIRE(run({"protocol", "--config", config.string(), "--out", out.string(), "--seeds", "1"}).code == 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(out / "runs")) {
      ++files;
      const auto text = testutil::read_file(e.path());
      CHECK(text.find("\nstd,0,0\n") != std::string::npos);
      CHECK(text.rfind("seed,accuracy,macro_f1\n1,", 0) == 0);
    }
    CHECK(files == 6 * 5);
    for (const auto& t : {"table_static.csv", "table_trainable.csv", "table_crosslingual.csv"}) {
      const auto text = testutil::read_file(out / t);
      CHECK(std::count(text.begin(), text.end(), '\n') == (std::string(t) == "table_crosslingual.csv" ? 2 : 3));
    }
  }
}
