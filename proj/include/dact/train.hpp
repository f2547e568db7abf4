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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dact/corpus.hpp"
#include "dact/eval.hpp"
#include "dact/models.hpp"
#include "dact/vocab.hpp"

namespace dact {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Index batch_size = 32;
  int epochs = 20;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::string> train_languages;
  double holdout_fraction = 0.0;   // > 0 keeps the parameters with the best holdout accuracy

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// One teacher-forced training example.
struct Sample {
  std::vector<int> tokens;   // windowed, encoded
  int previous = -1;         // gold tag of the previous utterance, -1 at dialogue start
  int target = 0;
};

// A dialogue ready for greedy decoding.
struct EncodedDialogue {
  std::string id;
  std::vector<int> turns;
  std::vector<std::vector<int>> tokens;
  std::vector<std::string> gold;
};

std::map<std::string, int> tag_index(const std::vector<std::string>& tag_set);

/// Encodes every utterance as a teacher-forced sample. Throws if a tag is not in `tag_set`.
std::vector<Sample> make_samples(const Corpus& corpus, const Vocabulary& vocab, Index window,
                                 const std::vector<std::string>& tag_set);

std::vector<EncodedDialogue> encode_dialogues(const Corpus& corpus, const Vocabulary& vocab, Index window);

/// Sorted union of the tag sets (the pooled label set of several languages).
std::vector<std::string> pooled_tag_set(const std::vector<Corpus>& corpora);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double holdout_accuracy = -1.0;
};

void write_training_log(const std::vector<EpochLog>& log, const std::filesystem::path& path);

template <typename Scalar>
class Adam {
 public:
  Adam(std::vector<nn::Parameter<Scalar>*> params, const TrainConfig& c)
      : params_(std::move(params)), lr_(c.learning_rate), beta1_(c.beta1), beta2_(c.beta2), eps_(c.epsilon) {
    for (auto* p : params_) {
      m_.push_back(nn::Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(nn::Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(beta1_), b2 = static_cast<Scalar>(beta2_);
    const auto step_size = static_cast<Scalar>(lr_ * std::sqrt(c2) / c1);
    const auto eps = static_cast<Scalar>(eps_ * std::sqrt(c2));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto* p = params_[i];
      if (p->frozen_row) p->grad.row(*p->frozen_row).setZero();
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * p->grad;
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * p->grad.cwiseAbs2();
      p->value.array() -= step_size * m_[i].array() / (v_[i].array().sqrt() + eps);
    }
  }

 private:
  std::vector<nn::Parameter<Scalar>*> params_;
  std::vector<nn::Matrix<Scalar>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

template <typename Scalar>
struct TrainResult {
  nn::LayerGraph<Scalar> graph;
  std::vector<EpochLog> log;
};

inline nn::Batch make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& order,
                            std::size_t begin, std::size_t end) {
  nn::Batch batch;
  const auto w = static_cast<Index>(samples[order[begin]].tokens.size());
  batch.tokens.resize(w, static_cast<Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) {
    const auto& s = samples[order[i]];
    if (static_cast<Index>(s.tokens.size()) != w) throw DataError("samples must share one window length");
    for (Index t = 0; t < w; ++t) batch.tokens(t, static_cast<Index>(i - begin)) = s.tokens[static_cast<std::size_t>(t)];
    batch.previous.push_back(s.previous);
    batch.targets.push_back(s.target);
  }
  return batch;
}

/// Teacher-forced accuracy of a graph on samples (gold previous tag as history).
template <typename Scalar>
double sample_accuracy(nn::LayerGraph<Scalar>& graph, const std::vector<Sample>& samples, Index batch_size = 256) {
  if (samples.empty()) return 0.0;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t hits = 0;
  for (std::size_t begin = 0; begin < samples.size(); begin += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(samples.size(), begin + static_cast<std::size_t>(batch_size));
    const auto batch = make_batch(samples, order, begin, end);
    const auto logits = graph.forward(batch, false);
    for (Index b = 0; b < batch.size(); ++b)
      hits += argmax_lowest(logits.col(b)) == batch.targets[static_cast<std::size_t>(b)];
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

/// Minimizes mean cross-entropy with Adam over shuffled teacher-forced samples.
/// Initialization and shuffling derive from `model.seed` only.
template <typename Scalar>
TrainResult<Scalar> train(const ModelConfig& model, const EmbeddingMatrix& embeddings, std::vector<Sample> samples,
                          const TrainConfig& config) {
  config.validate();
  if (samples.empty()) throw DataError("no training samples");
  for (const auto& s : samples) {
    if (s.target < 0 || s.target >= model.tag_count || s.previous >= model.tag_count)
      throw DataError("sample tag outside the model's tag set");
  }
  TrainResult<Scalar> result{build_model<Scalar>(model, embeddings), {}};
  auto& graph = result.graph;
  std::mt19937_64 rng(model.seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);

  std::vector<Sample> holdout;
  if (config.holdout_fraction > 0.0) {
    std::shuffle(samples.begin(), samples.end(), rng);
    const auto n = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(samples.size())));
    holdout.assign(samples.end() - static_cast<std::ptrdiff_t>(n), samples.end());
    samples.resize(samples.size() - n);
    if (samples.empty()) throw DataError("holdout fraction leaves no training samples");
  }

  Adam<Scalar> optimizer(graph.trainable_parameters(), config);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<nn::Matrix<Scalar>> best;
  double best_holdout = -1.0;
  long step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      const auto batch = make_batch(samples, order, begin, end);
      nn::Matrix<Scalar> probs;
      Scalar loss;
      try {
        loss = graph.forward_backward(batch, &probs);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at training step " + std::to_string(step));
      }
      if (!std::isfinite(static_cast<double>(loss)))
        throw NumericError("non-finite loss at training step " + std::to_string(step));
      optimizer.step();
      ++step;
      loss_sum += static_cast<double>(loss) * static_cast<double>(batch.size());
      for (Index b = 0; b < batch.size(); ++b)
        hits += argmax_lowest(probs.col(b)) == batch.targets[static_cast<std::size_t>(b)];
    }
    EpochLog entry{epoch, loss_sum / static_cast<double>(samples.size()),
                   static_cast<double>(hits) / static_cast<double>(samples.size())};
    if (!holdout.empty()) {
      entry.holdout_accuracy = sample_accuracy(graph, holdout);
      if (entry.holdout_accuracy > best_holdout) {
        best_holdout = entry.holdout_accuracy;
        best.clear();
        for (auto* p : graph.parameters()) best.push_back(p->value);
      }
    }
    result.log.push_back(entry);
  }
  if (!best.empty()) {
    const auto params = graph.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  }
  return result;
}

struct RunMetrics {
  std::uint64_t seed = 0;
  Metrics metrics;
};

struct ProtocolResult {
  std::vector<RunMetrics> runs;   // sorted by seed
  Metrics mean;
  Metrics stddev;                 // sample standard deviation (0 for a single run)
};

ProtocolResult aggregate_runs(std::vector<RunMetrics> runs);
void write_protocol_csv(const ProtocolResult& result, const std::filesystem::path& path);
std::string format_protocol_csv(const ProtocolResult& result);

/// Worker threads for seed-parallel work: DACT_THREADS if set, else the hardware count.
unsigned worker_threads();

/// Trains one model per seed and evaluates each with `evaluate`; results are
/// aggregated in seed order so the output does not depend on scheduling.
template <typename Scalar>
ProtocolResult run_protocol(const ModelConfig& model, const EmbeddingMatrix& embeddings,
                            const std::vector<Sample>& samples, const TrainConfig& config,
                            const std::function<Metrics(nn::LayerGraph<Scalar>&)>& evaluate) {
  config.validate();
  std::vector<RunMetrics> runs(config.seeds.size());
  std::vector<std::exception_ptr> errors(config.seeds.size());
  auto work = [&](std::size_t i) {
    try {
      ModelConfig m = model;
      m.seed = config.seeds[i];
      auto trained = train<Scalar>(m, embeddings, samples, config);
      runs[i] = RunMetrics{m.seed, evaluate(trained.graph)};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(runs.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < runs.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return aggregate_runs(std::move(runs));
}

}  // namespace dact
