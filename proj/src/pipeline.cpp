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

#include "dact/pipeline.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dact {

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

std::vector<std::string> language_list(const nlohmann::json& j) {
  if (j.is_string()) return split_languages(j.get<std::string>());
  return j.get<std::vector<std::string>>();
}

std::vector<GridCell> grid_from_json(const nlohmann::json& j) {
  std::vector<GridCell> cells;
  for (const auto& c : j) cells.push_back({language_list(c.at("train")), c.at("test").get<std::string>()});
  return cells;
}

nlohmann::json grid_to_json(const std::vector<GridCell>& cells) {
  auto out = nlohmann::json::array();
  for (const auto& c : cells) out.push_back({{"train", join_languages(c.train)}, {"test", c.test}});
  return out;
}

void read_data_block(const nlohmann::json& data, const fs::path& base, ExperimentConfig& c) {
  for (const auto& [code, files] : data.at("languages").items()) {
    LanguageFiles f;
    if (files.contains("train")) f.train = resolve(base, files["train"].get<std::string>());
    if (files.contains("test")) f.test = resolve(base, files["test"].get<std::string>());
    if (files.contains("vectors")) f.vectors = resolve(base, files["vectors"].get<std::string>());
    c.languages[code] = f;
  }
  if (data.contains("lexicon")) {
    const auto& lex = data["lexicon"];
    const auto columns = lex.at("columns").get<std::vector<std::string>>();
    if (columns.size() != 2) throw DataError("lexicon.columns must name two languages");
    c.lexicon = LexiconFiles{resolve(base, lex.at("path").get<std::string>()), columns[0], columns[1]};
  }
}

// Default grids over the configured languages: each language alone and all of
// them pooled, tested on every language; cross-lingual is every ordered pair.
std::vector<GridCell> default_multilingual(const std::vector<std::string>& langs) {
  std::vector<GridCell> cells;
  for (const auto& l : langs) cells.push_back({{l}, l});
  if (langs.size() > 1)
    for (const auto& l : langs) cells.push_back({langs, l});
  return cells;
}

std::vector<GridCell> default_crosslingual(const std::vector<std::string>& langs) {
  std::vector<GridCell> cells;
  for (const auto& pivot : langs)
    for (const auto& source : langs)
      if (pivot != source) cells.push_back({{pivot}, source});
  return cells;
}

std::string cell_stem(const GridCell& cell) { return join_languages(cell.train) + "_on_" + cell.test; }

}  // namespace

std::string join_languages(const std::vector<std::string>& langs) {
  std::string out;
  for (const auto& l : langs) out += (out.empty() ? "" : "+") + l;
  return out;
}

std::vector<std::string> split_languages(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, '+'))
    if (!part.empty()) out.push_back(part);
  if (out.empty()) throw DataError("empty language list '" + text + "'");
  return out;
}

void ExperimentConfig::validate() const {
  model.validate();
  train.validate();
  if (vocab_cap < 1) throw DataError("vocab_cap must be at least 1");
  auto known = [&](const std::string& l) {
    if (!languages.count(l)) throw DataError("language '" + l + "' has no data entry");
  };
  for (const auto& l : train_languages) known(l);
  if (!test_language.empty()) known(test_language);
  if (projected && train_languages.size() > 1) throw DataError("projected evaluation needs a single pivot language");
  for (const auto& cell : multilingual_grid) {
    for (const auto& l : cell.train) known(l);
    known(cell.test);
  }
  for (const auto& cell : crosslingual_grid) {
    if (cell.train.size() != 1) throw DataError("cross-lingual cells need a single pivot language");
    known(cell.train.front());
    known(cell.test);
  }
  if (ridge && !(*ridge > 0.0)) throw DataError("ridge must be positive");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& input, const fs::path& base_dir) {
  const nlohmann::json& j = input.contains("config") ? input["config"] : input;
  ExperimentConfig c;
  if (j.contains("data")) {
    if (j["data"].is_string()) {
      const fs::path data_path = resolve(base_dir, j["data"].get<std::string>());
      std::ifstream in(data_path);
      if (!in) throw DataError("cannot open data block " + data_path.string());
      nlohmann::json data;
      try {
        in >> data;
      } catch (const nlohmann::json::exception& e) {
        throw DataError(data_path.string() + ": " + e.what());
      }
      read_data_block(data, data_path.parent_path(), c);
    } else {
      read_data_block(j["data"], base_dir, c);
    }
  } else if (j.contains("languages")) {
    read_data_block(j, base_dir, c);
  }
  if (j.contains("model")) c.model = model_config_from_json(j["model"]);
  if (j.contains("train")) c.train = train_config_from_json(j["train"]);
  c.vocab_cap = j.value("vocab_cap", c.vocab_cap);
  if (j.contains("train_languages")) c.train_languages = language_list(j["train_languages"]);
  c.test_language = j.value("test_language", c.test_language);
  if (j.contains("embeddings")) {
    const auto mode = j["embeddings"].get<std::string>();
    c.projected = mode == "projected";
    if (!c.projected) c.model.embedding_mode = parse_embedding_mode(mode);
  }
  if (j.contains("ridge") && !j["ridge"].is_null()) c.ridge = j["ridge"].get<double>();

  std::vector<std::string> langs;
  for (const auto& [code, files] : c.languages) langs.push_back(code);
  if (c.train_languages.empty() && !langs.empty()) c.train_languages = {langs.front()};
  if (c.test_language.empty() && !c.train_languages.empty()) c.test_language = c.train_languages.front();
  const auto grid = j.value("grid", nlohmann::json::object());
  c.multilingual_grid = grid.contains("multilingual") ? grid_from_json(grid["multilingual"]) : default_multilingual(langs);
  c.crosslingual_grid = grid.contains("crosslingual") ? grid_from_json(grid["crosslingual"])
                                                      : (c.lexicon ? default_crosslingual(langs) : std::vector<GridCell>{});
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j, fs::absolute(path).parent_path());
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json data;
  data["languages"] = nlohmann::json::object();
  for (const auto& [code, f] : c.languages)
    data["languages"][code] = {{"train", f.train.string()}, {"test", f.test.string()}, {"vectors", f.vectors.string()}};
  if (c.lexicon)
    data["lexicon"] = {{"path", c.lexicon->path.string()},
                       {"columns", {c.lexicon->first_language, c.lexicon->second_language}}};
  nlohmann::json j{{"data", data},
                   {"model", to_json(c.model)},
                   {"train", to_json(c.train)},
                   {"vocab_cap", c.vocab_cap},
                   {"train_languages", join_languages(c.train_languages)},
                   {"test_language", c.test_language},
                   {"embeddings", c.projected ? std::string("projected") : to_string(c.model.embedding_mode)},
                   {"grid", {{"multilingual", grid_to_json(c.multilingual_grid)},
                             {"crosslingual", grid_to_json(c.crosslingual_grid)}}}};
  j["ridge"] = c.ridge ? nlohmann::json(*c.ridge) : nlohmann::json(nullptr);
  return j;
}

void write_predictions(const std::vector<Prediction>& predictions, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "dialogue_id\tturn_index\tgold_tag\tpredicted_tag\n";
  for (const auto& p : predictions) out << p.dialogue_id << '\t' << p.turn << '\t' << p.gold << '\t' << p.predicted << '\n';
}

const LanguageFiles& Experiment::files(const std::string& lang) const {
  const auto it = config_.languages.find(lang);
  if (it == config_.languages.end()) throw DataError("language '" + lang + "' has no data entry");
  return it->second;
}

const Corpus& Experiment::train_corpus(const std::string& lang) {
  auto it = train_.find(lang);
  if (it == train_.end()) {
    const auto& f = files(lang);
    if (f.train.empty()) throw DataError("language '" + lang + "' has no training split");
    it = train_.emplace(lang, parse_corpus(f.train)).first;
  }
  return it->second;
}

const Corpus& Experiment::test_corpus(const std::string& lang) {
  auto it = test_.find(lang);
  if (it == test_.end()) {
    const auto& f = files(lang);
    if (f.test.empty()) throw DataError("language '" + lang + "' has no test split");
    it = test_.emplace(lang, parse_corpus(f.test)).first;
  }
  return it->second;
}

const VectorMap& Experiment::vectors(const std::string& lang) {
  auto it = vectors_.find(lang);
  if (it == vectors_.end()) {
    const auto& f = files(lang);
    it = vectors_.emplace(lang, f.vectors.empty() ? VectorMap{} : load_vectors(f.vectors)).first;
  }
  return it->second;
}

TrainingSetup Experiment::prepare(const std::vector<std::string>& train_langs, const ModelConfig& model) {
  if (train_langs.empty()) throw DataError("no training languages");
  TrainingSetup s;
  s.model = model;
  std::vector<Corpus> corpora;
  for (const auto& l : train_langs) corpora.push_back(train_corpus(l));
  s.vocab = corpora.size() == 1 ? build_vocab(corpora.front(), config_.vocab_cap)
                                : build_union_vocab(corpora, config_.vocab_cap);

  VectorMap merged;
  for (const auto& l : train_langs)
    for (const auto& [token, v] : vectors(l)) merged.emplace(token, v);   // first language keeps homographs
  if (!merged.empty()) s.model.emb_dim = merged.begin()->second.size();
  s.embeddings = build_matrix(s.vocab, merged, s.model.emb_dim, s.model.embedding_mode, s.model.seed);

  s.tags = pooled_tag_set(corpora);
  s.model.tag_count = static_cast<Index>(s.tags.size());
  for (const auto& c : corpora) {
    auto part = make_samples(c, s.vocab, s.model.window, s.tags);
    s.samples.insert(s.samples.end(), part.begin(), part.end());
  }
  return s;
}

CcaModel<double> Experiment::fit_alignment(const std::string& source, const std::string& pivot, std::size_t* dropped) {
  if (!config_.lexicon) throw DataError("cross-lingual evaluation needs a lexicon");
  const auto& lex = *config_.lexicon;
  bool swap = false;
  if (lex.first_language == source && lex.second_language == pivot) {
    swap = false;
  } else if (lex.first_language == pivot && lex.second_language == source) {
    swap = true;
  } else {
    throw DataError("lexicon pairs " + lex.first_language + "/" + lex.second_language + ", not " + source + "/" +
                    pivot);
  }
  const auto pairs = lexicon_matrices(load_lexicon(lex.path, swap), vectors(source), vectors(pivot));
  if (dropped) *dropped = pairs.dropped;
  return fit_cca(pairs.source, pairs.pivot, config_.ridge);
}

ProjectedTable Experiment::projected_table(const std::string& source, const CcaModel<double>& cca) {
  ProjectedTable p;
  p.vocab = build_vocab(train_corpus(source), config_.vocab_cap);
  const auto& vecs = vectors(source);
  const auto table = build_matrix(p.vocab, vecs, cca.dim(), EmbeddingMode::kStatic, config_.model.seed);
  p.table = project_corpus(cca, table);
  for (std::size_t r = 2; r < p.vocab.size(); ++r)
    if (!vecs.count(p.vocab.entries()[r])) p.missing_rows.push_back(static_cast<Index>(r));
  return p;
}

ProtocolTables run_protocol_grid(Experiment& experiment, const fs::path& out_dir) {
  const auto& config = experiment.config();
  fs::create_directories(out_dir / "runs");
  ProtocolTables tables;

  auto run_row = [&](const GridCell& cell, EmbeddingMode mode, bool cross, const std::string& table) {
    ReportRow row{join_languages(cell.train), cell.test, {}};
    for (const auto& [arch, history] : kReportColumns) {
      ModelConfig model = config.model;
      model.architecture = parse_architecture(arch);
      model.use_history = history;
      model.embedding_mode = mode;
      const auto result = experiment.run_cell<double>(cell, model, cross);
      write_protocol_csv(result, out_dir / "runs" /
                                     (table + "_" + cell_stem(cell) + "_" + arch + (history ? "_hist" : "_nohist") + ".csv"));
      row.cells[report_column(arch, history)] = result.mean;
    }
    return row;
  };

  for (const auto& cell : config.multilingual_grid) {
    tables.static_rows.push_back(run_row(cell, EmbeddingMode::kStatic, false, "static"));
    tables.trainable_rows.push_back(run_row(cell, EmbeddingMode::kTrainable, false, "trainable"));
  }
  for (const auto& cell : config.crosslingual_grid)
    tables.crosslingual_rows.push_back(run_row(cell, EmbeddingMode::kStatic, true, "crosslingual"));

  write_report(tables.static_rows, out_dir / "table_static.csv");
  write_report(tables.trainable_rows, out_dir / "table_trainable.csv");
  write_report(tables.crosslingual_rows, out_dir / "table_crosslingual.csv");
  return tables;
}

}  // namespace dact
