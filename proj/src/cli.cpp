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

#include "dact/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dact/pipeline.hpp"
#include "dact/synthgen.hpp"

namespace dact {

namespace {

using json = nlohmann::json;

struct Overrides {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::string arch;
  std::string history;
  std::string embeddings;
  std::string train_langs;
  std::string test_lang;
};

void add_config_flags(CLI::App* app, Overrides& o, bool need_config) {
  auto* c = app->add_option("--config", o.config, "JSON config file (or a run manifest)");
  if (need_config) c->required();
  app->add_option("--out", o.out, "output directory");
}

void add_model_flags(CLI::App* app, Overrides& o) {
  app->add_option("--seed", o.seed, "model seed");
  app->add_option("--seeds", o.seeds, "comma-separated seed list")->delimiter(',');
  app->add_option("--arch", o.arch, "architecture")->check(CLI::IsMember({"cnn1", "cnn2", "bilstm"}));
  app->add_option("--history", o.history, "previous-tag input")->check(CLI::IsMember({"on", "off"}));
  app->add_option("--embeddings", o.embeddings, "embedding mode")
      ->check(CLI::IsMember({"static", "trainable", "projected"}));
  app->add_option("--train-langs", o.train_langs, "training languages, e.g. en+de");
  app->add_option("--test-lang", o.test_lang, "test language");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ExperimentConfig effective_config(const Overrides& o) {
  auto c = load_experiment_config(o.config);
  if (o.seed) {
    c.model.seed = *o.seed;
    c.train.seeds = {*o.seed};
  }
  if (!o.seeds.empty()) {
    c.train.seeds = o.seeds;
    if (!o.seed) c.model.seed = o.seeds.front();
  }
  if (!o.arch.empty()) c.model.architecture = parse_architecture(o.arch);
  if (!o.history.empty()) c.model.use_history = o.history == "on";
  if (o.embeddings == "projected") {
    c.projected = true;
    c.model.embedding_mode = EmbeddingMode::kStatic;
  } else if (!o.embeddings.empty()) {
    c.projected = false;
    c.model.embedding_mode = parse_embedding_mode(o.embeddings);
  }
  if (!o.train_langs.empty()) c.train_languages = split_languages(o.train_langs);
  if (!o.test_lang.empty()) c.test_language = o.test_lang;
  c.validate();
  return c;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The manifest is written before any result and completed with the output
// list once the command succeeds.
class Manifest {
 public:
  Manifest(const std::string& command, const Overrides& o, json config)
      : dir_(o.out),
        j_{{"tool", "dact"},
           {"version", kVersion},
           {"command", command},
           {"config_path", o.config.empty() ? "" : fs::absolute(o.config).string()},
           {"config", std::move(config)},
           {"out_dir", fs::absolute(o.out).lexically_normal().string()},
           {"started_at", utc_now()}} {
    fs::create_directories(dir_);
    write_json(j_, dir_ / "manifest.json");
  }

  fs::path path(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }

  void finish() {
    j_["outputs"] = outputs_;
    j_["finished_at"] = utc_now();
    write_json(j_, dir_ / "manifest.json");
  }

 private:
  fs::path dir_;
  json j_;
  std::vector<std::string> outputs_;
};

void write_metrics(const Evaluation& ev, Manifest& m) {
  write_json({{"accuracy", ev.metrics.accuracy}, {"macro_f1", ev.metrics.macro_f1}}, m.path("metrics.json"));
  write_predictions(ev.predictions, m.path("predictions.tsv"));
  write_class_scores(ev.class_scores, m.path("class_scores.csv"));
}

std::string pivot_language(const ExperimentConfig& c) {
  if (c.train_languages.size() != 1) throw DataError("projected mode needs exactly one pivot language");
  return c.train_languages.front();
}

// ---- subcommands -----------------------------------------------------------

int run_stats(const std::string& path, std::ostream& out) {
  const auto stats = compute_stats(parse_corpus(path));
  out << "dialogue#=" << stats.dialogue_count << '\n'
      << "DA#=" << stats.da_count << '\n'
      << "word#=" << stats.word_count << '\n';
  return 0;
}

int run_vocab_build(const Overrides& o) {
  const auto c = effective_config(o);
  Manifest m("vocab build", o, to_json(c));
  Experiment ex(c);
  const auto setup = ex.prepare(c.train_languages, c.model);
  save_vocab(setup.vocab, m.path("vocab.txt"));
  m.finish();
  return 0;
}

int run_synth(const Overrides& o, const std::string& preset) {
  SynthSpec spec;
  if (!o.config.empty()) {
    json j = read_json(o.config);
    spec = synth_spec_from_json(j.contains("config") ? j["config"] : j);
  } else if (preset == "ambiguity") {
    spec = ambiguity_spec(5, 500, 200, 1);
  } else {
    spec = separable_spec(5, 500, 200, 1);
  }
  if (o.seed) spec.seed = *o.seed;
  spec.validate();
  Manifest m("synth generate", o, to_json(spec));
  const auto data = generate(spec);
  write_synth(data, spec, o.out);
  for (const auto& l : {spec.language1, spec.language2}) {
    m.path(l + "_train.tsv");
    m.path(l + "_test.tsv");
    m.path(l + ".vec");
  }
  m.path("lexicon.tsv");
  m.path("data.json");
  m.finish();
  return 0;
}

int run_align_fit(const Overrides& o, std::ostream& out) {
  const auto c = effective_config(o);
  Manifest m("align fit", o, to_json(c));
  Experiment ex(c);
  std::size_t dropped = 0;
  const auto cca = ex.fit_alignment(c.test_language, pivot_language(c), &dropped);
  save_cca(cca, m.path("cca.json"));
  out << "pairs dropped: " << dropped << "\nmin correlation: " << cca.correlations.minCoeff() << '\n';
  m.finish();
  return 0;
}

int run_align_apply(const Overrides& o, const std::string& cca_path) {
  const auto c = effective_config(o);
  json snapshot = to_json(c);
  snapshot["cca"] = fs::absolute(cca_path).string();
  Manifest m("align apply", o, snapshot);
  Experiment ex(c);
  const auto cca = load_cca(cca_path);
  VectorMap projected;
  for (const auto& [token, v] : ex.vectors(c.test_language)) projected.emplace(token, project(cca, v));
  save_vectors(projected, m.path(c.test_language + "_projected.vec"));
  m.finish();
  return 0;
}

struct LoadedModel {
  nn::LayerGraph<double> graph;
  std::vector<std::string> tags;
  Vocabulary vocab;
};

LoadedModel load_model(const fs::path& dir) {
  std::ifstream in(dir / "model.ckpt", std::ios::binary);
  if (!in) throw DataError("cannot open " + (dir / "model.ckpt").string());
  const auto meta = nn::read_checkpoint_metadata(in);
  const auto model = model_config_from_json(meta.at("model"));
  auto vocab = load_vocab(dir / "vocab.txt");
  EmbeddingMatrix placeholder{Eigen::MatrixXd::Zero(static_cast<Index>(vocab.size()), model.emb_dim),
                              model.embedding_mode};
  LoadedModel lm{build_model<double>(model, placeholder), meta.at("tags").get<std::vector<std::string>>(),
                 std::move(vocab)};
  in.clear();
  in.seekg(0);
  nn::read_checkpoint(lm.graph, in);
  return lm;
}

// Decodes `test` with the model in `model_dir`; projected runs go through the
// saved CCA model.
Evaluation evaluate_saved(const ExperimentConfig& c, const fs::path& model_dir, const Corpus& test) {
  auto lm = load_model(model_dir);
  Experiment ex(c);
  if (c.projected) {
    const auto table = ex.projected_table(c.test_language, load_cca(model_dir / "cca.json"));
    return ex.evaluate_projected(lm.graph, lm.tags, table, test);
  }
  return ex.evaluate(lm.graph, lm.vocab, lm.tags, test);
}

int run_train(const Overrides& o, std::ostream& out) {
  const auto c = effective_config(o);
  Manifest m("train", o, to_json(c));
  Experiment ex(c);
  auto setup = ex.prepare(c.train_languages, c.model);
  auto result = train<double>(setup.model, setup.embeddings, setup.samples, c.train);
  save_vocab(setup.vocab, m.path("vocab.txt"));
  write_training_log(result.log, m.path("training_log.csv"));

  Evaluation ev;
  if (c.projected) {
    const auto cca = ex.fit_alignment(c.test_language, pivot_language(c));
    save_cca(cca, m.path("cca.json"));
    // Checkpoint the pivot model before its table is swapped for the projected one.
    nn::save_checkpoint(result.graph, json{{"model", to_json(setup.model)}, {"tags", setup.tags}}, m.path("model.ckpt"));
    ev = ex.evaluate_projected(result.graph, setup.tags, ex.projected_table(c.test_language, cca),
                               ex.test_corpus(c.test_language));
  } else {
    nn::save_checkpoint(result.graph, json{{"model", to_json(setup.model)}, {"tags", setup.tags}}, m.path("model.ckpt"));
    ev = ex.evaluate(result.graph, setup.vocab, setup.tags, ex.test_corpus(c.test_language));
  }
  write_metrics(ev, m);
  out << "accuracy=" << ev.metrics.accuracy << " macro_f1=" << ev.metrics.macro_f1 << '\n';
  m.finish();
  return 0;
}

int run_evaluate(const Overrides& o, const std::string& model_dir, const std::string& input, std::ostream& out,
                 bool predictions_only) {
  auto c = effective_config(o);
  json snapshot = to_json(c);
  snapshot["model_dir"] = fs::absolute(model_dir).string();
  if (!input.empty()) snapshot["input"] = fs::absolute(input).string();
  Manifest m(predictions_only ? "predict" : "evaluate", o, snapshot);
  Experiment ex(c);
  const Corpus test = input.empty() ? ex.test_corpus(c.test_language) : parse_corpus(input);
  const auto ev = evaluate_saved(c, model_dir, test);
  if (predictions_only) {
    write_predictions(ev.predictions, m.path("predictions.tsv"));
  } else {
    write_metrics(ev, m);
    out << "accuracy=" << ev.metrics.accuracy << " macro_f1=" << ev.metrics.macro_f1 << '\n';
  }
  m.finish();
  return 0;
}

int run_protocol_command(const Overrides& o) {
  const auto c = effective_config(o);
  Manifest m("protocol", o, to_json(c));
  Experiment ex(c);
  const auto tables = run_protocol_grid(ex, o.out);
  for (const auto& t : {"table_static", "table_trainable", "table_crosslingual"}) {
    m.path(std::string(t) + ".csv");
    m.path(std::string(t) + "_full.csv");
  }
  m.path("runs");
  m.finish();
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dialogue act recognition experiments", "dact"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Overrides o;

  std::string corpus_path;
  auto* stats = app.add_subcommand("stats", "print dialogue, utterance and word counts");
  stats->add_option("corpus", corpus_path, "corpus TSV")->required();

  auto* vocab = app.add_subcommand("vocab", "vocabulary tools");
  vocab->require_subcommand(1);
  auto* vocab_build = vocab->add_subcommand("build", "build the training vocabulary");
  add_config_flags(vocab_build, o, true);
  add_model_flags(vocab_build, o);

  std::string preset = "separable";
  auto* synth = app.add_subcommand("synth", "synthetic data");
  synth->require_subcommand(1);
  auto* synth_generate = synth->add_subcommand("generate", "write a synthetic bilingual corpus");
  add_config_flags(synth_generate, o, false);
  synth_generate->add_option("--preset", preset, "recipe when no config is given")
      ->check(CLI::IsMember({"separable", "ambiguity"}));
  synth_generate->add_option("--seed", o.seed, "generator seed");

  std::string cca_path;
  auto* align = app.add_subcommand("align", "cross-lingual embedding alignment");
  align->require_subcommand(1);
  auto* align_fit = align->add_subcommand("fit", "fit CCA from --test-lang (source) to --train-langs (pivot)");
  add_config_flags(align_fit, o, true);
  add_model_flags(align_fit, o);
  auto* align_apply = align->add_subcommand("apply", "project the --test-lang vectors into pivot space");
  add_config_flags(align_apply, o, true);
  add_model_flags(align_apply, o);
  align_apply->add_option("--cca", cca_path, "CCA model from align fit")->required();

  auto* train_cmd = app.add_subcommand("train", "train one model and evaluate it");
  add_config_flags(train_cmd, o, true);
  add_model_flags(train_cmd, o);

  std::string model_dir, input;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a trained model on the test split");
  add_config_flags(evaluate_cmd, o, true);
  add_model_flags(evaluate_cmd, o);
  evaluate_cmd->add_option("--model", model_dir, "output directory of a train run")->required();
  evaluate_cmd->add_option("--input", input, "corpus TSV instead of the configured test split");

  auto* predict_cmd = app.add_subcommand("predict", "write predictions of a trained model");
  add_config_flags(predict_cmd, o, true);
  add_model_flags(predict_cmd, o);
  predict_cmd->add_option("--model", model_dir, "output directory of a train run")->required();
  predict_cmd->add_option("--input", input, "corpus TSV instead of the configured test split");

  auto* protocol = app.add_subcommand("protocol", "multi-seed grid over architectures and history settings");
  add_config_flags(protocol, o, true);
  add_model_flags(protocol, o);

  if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
    err << "unknown subcommand '" << argv[1] << "'\n" << app.help();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  try {
    if (*stats) return run_stats(corpus_path, out);
    if (*vocab_build) return run_vocab_build(o);
    if (*synth_generate) return run_synth(o, preset);
    if (*align_fit) return run_align_fit(o, out);
    if (*align_apply) return run_align_apply(o, cca_path);
    if (*train_cmd) return run_train(o, out);
    if (*evaluate_cmd) return run_evaluate(o, model_dir, input, out, false);
    if (*predict_cmd) return run_evaluate(o, model_dir, input, out, true);
    if (*protocol) return run_protocol_command(o);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace dact
