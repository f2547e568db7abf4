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

#include "dact/train.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace dact {

namespace {

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DataError("learning rate must be positive");
  if (batch_size < 1) throw DataError("batch size must be at least 1");
  if (epochs < 0) throw DataError("epoch count must be non-negative");
  if (seeds.empty()) throw DataError("at least one seed is required");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) throw DataError("holdout fraction must be in [0, 1)");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},       {"beta2", c.beta2},
          {"epsilon", c.epsilon},             {"batch_size", c.batch_size}, {"epochs", c.epochs},
          {"seeds", c.seeds},                 {"train_languages", c.train_languages},
          {"holdout_fraction", c.holdout_fraction}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seeds = j.value("seeds", c.seeds);
  c.train_languages = j.value("train_languages", c.train_languages);
  c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
  return c;
}

std::map<std::string, int> tag_index(const std::vector<std::string>& tag_set) {
  std::map<std::string, int> index;
  for (const auto& t : tag_set) index.emplace(t, static_cast<int>(index.size()));
  return index;
}

std::vector<Sample> make_samples(const Corpus& corpus, const Vocabulary& vocab, Index window,
                                 const std::vector<std::string>& tag_set) {
  const auto index = tag_index(tag_set);
  auto lookup = [&](const std::string& tag) {
    const auto it = index.find(tag);
    if (it == index.end()) throw DataError("tag '" + tag + "' is missing from the pooled tag set");
    return it->second;
  };
  std::vector<Sample> samples;
  for (const auto& d : corpus.dialogues) {
    int previous = -1;
    for (const auto& u : d.utterances) {
      Sample s;
      s.tokens = encode(vocab, dact::window(u.tokens, static_cast<std::size_t>(window)));
      s.previous = previous;
      s.target = lookup(u.da_tag);
      previous = s.target;
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::vector<EncodedDialogue> encode_dialogues(const Corpus& corpus, const Vocabulary& vocab, Index window) {
  std::vector<EncodedDialogue> out;
  out.reserve(corpus.dialogues.size());
  for (const auto& d : corpus.dialogues) {
    EncodedDialogue e;
    e.id = d.id;
    for (const auto& u : d.utterances) {
      e.turns.push_back(u.turn);
      e.tokens.push_back(encode(vocab, dact::window(u.tokens, static_cast<std::size_t>(window))));
      e.gold.push_back(u.da_tag);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> pooled_tag_set(const std::vector<Corpus>& corpora) {
  std::set<std::string> tags;
  for (const auto& c : corpora) tags.insert(c.tag_set.begin(), c.tag_set.end());
  return {tags.begin(), tags.end()};
}

void write_training_log(const std::vector<EpochLog>& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write training log " + path.string());
  out << "epoch,loss,train_accuracy\n";
  for (const auto& e : log) out << e.epoch << ',' << full(e.loss) << ',' << full(e.train_accuracy) << '\n';
}

ProtocolResult aggregate_runs(std::vector<RunMetrics> runs) {
  if (runs.empty()) throw DataError("no runs to aggregate");
  std::sort(runs.begin(), runs.end(), [](const RunMetrics& a, const RunMetrics& b) { return a.seed < b.seed; });
  ProtocolResult r;
  const double n = static_cast<double>(runs.size());
  for (const auto& run : runs) {
    r.mean.accuracy += run.metrics.accuracy;
    r.mean.macro_f1 += run.metrics.macro_f1;
  }
  r.mean.accuracy /= n;
  r.mean.macro_f1 /= n;
  if (runs.size() > 1) {
    for (const auto& run : runs) {
      r.stddev.accuracy += (run.metrics.accuracy - r.mean.accuracy) * (run.metrics.accuracy - r.mean.accuracy);
      r.stddev.macro_f1 += (run.metrics.macro_f1 - r.mean.macro_f1) * (run.metrics.macro_f1 - r.mean.macro_f1);
    }
    r.stddev.accuracy = std::sqrt(r.stddev.accuracy / (n - 1.0));
    r.stddev.macro_f1 = std::sqrt(r.stddev.macro_f1 / (n - 1.0));
  }
  r.runs = std::move(runs);
  return r;
}

std::string format_protocol_csv(const ProtocolResult& result) {
  std::ostringstream out;
  out << "seed,accuracy,macro_f1\n";
  for (const auto& run : result.runs)
    out << run.seed << ',' << full(run.metrics.accuracy) << ',' << full(run.metrics.macro_f1) << '\n';
  out << "mean," << full(result.mean.accuracy) << ',' << full(result.mean.macro_f1) << '\n';
  out << "std," << full(result.stddev.accuracy) << ',' << full(result.stddev.macro_f1) << '\n';
  return out.str();
}

void write_protocol_csv(const ProtocolResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_protocol_csv(result);
}

unsigned worker_threads() {
  if (const char* env = std::getenv("DACT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace dact
