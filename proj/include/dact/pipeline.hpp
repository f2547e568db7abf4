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

#pragma once

#include <filesystem>
#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dact/align.hpp"
#include "dact/corpus.hpp"
#include "dact/embeddings.hpp"
#include "dact/eval.hpp"
#include "dact/models.hpp"
#include "dact/nn/checkpoint.hpp"
#include "dact/train.hpp"
#include "dact/vocab.hpp"

namespace dact {

namespace fs = std::filesystem;

struct LanguageFiles {
  fs::path train;
  fs::path test;
  fs::path vectors;
};

struct LexiconFiles {
  fs::path path;
  std::string first_language;    // language of column 1
  std::string second_language;   // language of column 2
};

// A train/test configuration such as ("en+de", "de").
struct GridCell {
  std::vector<std::string> train;
  std::string test;
};

std::string join_languages(const std::vector<std::string>& langs);
std::vector<std::string> split_languages(const std::string& text);

// Resolved experiment settings; see README for the JSON schema.
struct ExperimentConfig {
  std::map<std::string, LanguageFiles> languages;
  std::optional<LexiconFiles> lexicon;
  ModelConfig model;
  TrainConfig train;
  std::size_t vocab_cap = 10000;
  std::vector<std::string> train_languages;
  std::string test_language;
  bool projected = false;                 // evaluate through the CCA projection
  std::optional<double> ridge;
  std::vector<GridCell> multilingual_grid;
  std::vector<GridCell> crosslingual_grid;

  void validate() const;
};

/// Reads a config file; relative paths resolve against the file's directory.
/// A run manifest is accepted too (its "config" block is used).
ExperimentConfig load_experiment_config(const fs::path& path);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const fs::path& base_dir);
nlohmann::json to_json(const ExperimentConfig& config);

struct Prediction {
  std::string dialogue_id;
  int turn = 0;
  std::string gold;
  std::string predicted;
};

struct Evaluation {
  Metrics metrics;
  std::vector<Prediction> predictions;
  std::vector<std::string> tag_set;   // model tags plus any unseen gold tags
  std::vector<ClassScore> class_scores;
};

void write_predictions(const std::vector<Prediction>& predictions, const fs::path& path);

struct ProjectedTable {
  Vocabulary vocab;
  EmbeddingMatrix table;
  std::vector<Index> missing_rows;
};

// Everything needed to train one model: vocabulary, embeddings, samples, tags.
struct TrainingSetup {
  Vocabulary vocab;
  EmbeddingMatrix embeddings;
  std::vector<Sample> samples;
  std::vector<std::string> tags;
  ModelConfig model;
};

// Lazily loads and caches corpora and vectors per language.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config) : config_(std::move(config)) {}

  const ExperimentConfig& config() const { return config_; }

  const Corpus& train_corpus(const std::string& lang);
  const Corpus& test_corpus(const std::string& lang);
  const VectorMap& vectors(const std::string& lang);

  /// Union vocabulary when several languages are given, pooled tag set,
  /// embeddings from the merged vector maps (first listed language wins on homographs).
  TrainingSetup prepare(const std::vector<std::string>& train_langs, const ModelConfig& model);

  /// CCA fit from the lexicon, source -> pivot.
  CcaModel<double> fit_alignment(const std::string& source, const std::string& pivot, std::size_t* dropped = nullptr);

  /// Static source-language table in pivot space, vocabulary built from the
  /// source training split. `missing_rows` lists rows whose token has no vector.
  ProjectedTable projected_table(const std::string& source, const CcaModel<double>& cca);

  template <typename Scalar>
  Evaluation evaluate(nn::LayerGraph<Scalar>& graph, const Vocabulary& vocab, const std::vector<std::string>& tags,
                      const Corpus& test) {
    const auto dialogues = encode_dialogues(test, vocab, graph.window());
    std::vector<std::vector<std::vector<int>>> inputs;
    inputs.reserve(dialogues.size());
    for (const auto& d : dialogues) inputs.push_back(d.tokens);
    const auto predicted = predict_dialogues(graph, inputs);
    Evaluation ev;
    ev.tag_set = tags;
    std::vector<std::string> gold, pred;
    for (std::size_t d = 0; d < dialogues.size(); ++d) {
      for (std::size_t t = 0; t < dialogues[d].gold.size(); ++t) {
        const auto& p = tags[static_cast<std::size_t>(predicted[d][t])];
        ev.predictions.push_back({dialogues[d].id, dialogues[d].turns[t], dialogues[d].gold[t], p});
        gold.push_back(dialogues[d].gold[t]);
        pred.push_back(p);
      }
    }
    for (const auto& g : gold)
      if (std::find(ev.tag_set.begin(), ev.tag_set.end(), g) == ev.tag_set.end()) ev.tag_set.push_back(g);
    std::sort(ev.tag_set.begin(), ev.tag_set.end());
    ev.metrics.accuracy = accuracy(gold, pred);
    ev.metrics.macro_f1 = macro_f1(gold, pred, ev.tag_set);
    const auto index = tag_index(ev.tag_set);
    std::vector<int> gi, pi;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      gi.push_back(index.at(gold[i]));
      pi.push_back(index.at(pred[i]));
    }
    ev.class_scores = class_scores(confusion_matrix(gi, pi, ev.tag_set.size()), ev.tag_set);
    return ev;
  }

  /// Evaluates a pivot-trained graph on projected source-language data. The
  /// graph's lookup table is replaced; rows without a source vector and UNK take
  /// the pivot model's UNK row.
  template <typename Scalar>
  Evaluation evaluate_projected(nn::LayerGraph<Scalar>& graph, const std::vector<std::string>& tags,
                                const ProjectedTable& projected, const Corpus& test) {
    EmbeddingMatrix table = projected.table;
    const Eigen::RowVectorXd unk = graph.embedding().table().value.row(kUnkIndex).template cast<double>();
    table.matrix.row(kUnkIndex) = unk;
    for (Index r : projected.missing_rows) table.matrix.row(r) = unk;
    set_embeddings(graph, table);
    return evaluate(graph, projected.vocab, tags, test);
  }

  /// Multi-seed run of one configuration: train on `cell.train`, test on `cell.test`.
  /// With `cross`, `cell.train` must be a single pivot language and the test
  /// language is evaluated through the CCA projection.
  template <typename Scalar>
  ProtocolResult run_cell(const GridCell& cell, const ModelConfig& model, bool cross) {
    auto setup = prepare(cell.train, model);
    std::optional<ProjectedTable> projected;
    if (cross) {
      if (cell.train.size() != 1) throw DataError("cross-lingual training needs exactly one pivot language");
      projected = projected_table(cell.test, fit_alignment(cell.test, cell.train.front()));
    }
    const Corpus& test = test_corpus(cell.test);
    std::function<Metrics(nn::LayerGraph<Scalar>&)> evaluate_fn = [&](nn::LayerGraph<Scalar>& graph) {
      if (projected) return evaluate_projected(graph, setup.tags, *projected, test).metrics;
      return evaluate(graph, setup.vocab, setup.tags, test).metrics;
    };
    return run_protocol<Scalar>(setup.model, setup.embeddings, setup.samples, config_.train, evaluate_fn);
  }

 private:
  const LanguageFiles& files(const std::string& lang) const;

  ExperimentConfig config_;
  std::map<std::string, Corpus> train_, test_;
  std::map<std::string, VectorMap> vectors_;
};

struct ProtocolTables {
  std::vector<ReportRow> static_rows;
  std::vector<ReportRow> trainable_rows;
  std::vector<ReportRow> crosslingual_rows;
};

/// Full grid: multilingual cells with static and fine-tuned embeddings and the
/// cross-lingual cells, each for every architecture with and without history.
/// Writes table_static.csv, table_trainable.csv, table_crosslingual.csv (plus
/// full-precision sidecars) and per-cell seed CSVs under runs/.
ProtocolTables run_protocol_grid(Experiment& experiment, const fs::path& out_dir);

}  // namespace dact
