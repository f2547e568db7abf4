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

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dact/embeddings.hpp"
#include "dact/nn/graph.hpp"
#include "dact/nn/lstm.hpp"

namespace dact {

enum class Architecture { kCnn1, kCnn2, kBiLstm };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);
std::string to_string(EmbeddingMode mode);
EmbeddingMode parse_embedding_mode(const std::string& name);

struct ModelConfig {
  Architecture architecture = Architecture::kBiLstm;
  Index window = 15;
  Index emb_dim = 300;
  bool use_history = true;
  Index tag_count = 16;
  EmbeddingMode embedding_mode = EmbeddingMode::kStatic;
  std::uint64_t seed = 1;
  double dropout = 0.0;

  // Layer sizes.
  Index cnn1_kernels = 40;
  Index cnn1_kernel_height = 4;
  Index hidden_units = 256;
  Index cnn2_kernels = 100;
  std::vector<Index> cnn2_kernel_heights{3, 4, 5};
  Index lstm_units = 100;

  Index max_kernel_height() const;
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Width of the feature vector produced before the history concat and output layer.
Index feature_width(const ModelConfig& config);

/// Closed-form parameter count of build_model(config, table with `vocab_size` rows).
Index expected_parameter_count(const ModelConfig& config, Index vocab_size);

/// cnn1:   lookup -> conv(h,1) x kernels -> relu -> max-over-time -> flatten -> dense relu
/// cnn2:   lookup -> {conv(h,EMB) x kernels for each h} -> relu -> max-over-time -> merge -> dense relu
/// bilstm: lookup -> bidirectional LSTM (final states of both directions)
/// then [concat one-hot previous tag] -> dense -> softmax for all three.
template <typename Scalar>
nn::LayerGraph<Scalar> build_model(const ModelConfig& config, const EmbeddingMatrix& emb) {
  config.validate();
  if (emb.dim() != config.emb_dim) {
    throw DataError("embedding dimension " + std::to_string(emb.dim()) + " does not match model dimension " +
                    std::to_string(config.emb_dim));
  }
  std::mt19937_64 rng(config.seed);
  const Index w = config.window, e = config.emb_dim;
  auto body = std::make_unique<nn::Sequential<Scalar>>();

  auto add_dense_relu = [&](Index in) {
    body->add(std::make_unique<nn::Dense<Scalar>>("hidden", in, config.hidden_units, rng));
    body->add(std::make_unique<nn::Relu<Scalar>>(config.hidden_units));
    if (config.dropout > 0)
      body->add(std::make_unique<nn::Dropout<Scalar>>(config.hidden_units, config.dropout, config.seed + 1));
  };

  switch (config.architecture) {
    case Architecture::kCnn1: {
      const nn::ConvShape shape{1, w, e, config.cnn1_kernels, config.cnn1_kernel_height, 1};
      body->add(std::make_unique<nn::Conv2d<Scalar>>("conv", shape, rng));
      body->add(std::make_unique<nn::Relu<Scalar>>(shape.output_size()));
      body->add(std::make_unique<nn::MaxOverTime<Scalar>>(shape.count, shape.out_height(), shape.out_width()));
      add_dense_relu(shape.count * shape.out_width());
      break;
    }
    case Architecture::kCnn2: {
      auto merged = std::make_unique<nn::Parallel<Scalar>>();
      for (Index h : config.cnn2_kernel_heights) {
        const nn::ConvShape shape{1, w, e, config.cnn2_kernels, h, e};
        auto branch = std::make_unique<nn::Sequential<Scalar>>();
        branch->add(std::make_unique<nn::Conv2d<Scalar>>("conv" + std::to_string(h), shape, rng));
        branch->add(std::make_unique<nn::Relu<Scalar>>(shape.output_size()));
        branch->add(std::make_unique<nn::MaxOverTime<Scalar>>(shape.count, shape.out_height(), 1));
        merged->add(std::move(branch));
      }
      const Index width = merged->output_size();
      body->add(std::move(merged));
      add_dense_relu(width);
      break;
    }
    case Architecture::kBiLstm: {
      body->add(std::make_unique<nn::BiLstm<Scalar>>("bilstm", w, e, config.lstm_units, rng));
      if (config.dropout > 0)
        body->add(std::make_unique<nn::Dropout<Scalar>>(2 * config.lstm_units, config.dropout, config.seed + 1));
      break;
    }
  }

  nn::Embedding<Scalar> embedding(emb.matrix.cast<Scalar>(), config.embedding_mode == EmbeddingMode::kTrainable);
  return nn::LayerGraph<Scalar>(std::move(embedding), std::move(body), config.tag_count, config.use_history, rng);
}

/// Replaces the lookup table (e.g. with a projected source-language matrix).
/// The table always becomes static.
template <typename Scalar>
void set_embeddings(nn::LayerGraph<Scalar>& graph, const EmbeddingMatrix& emb) {
  auto& table = graph.embedding().table();
  if (emb.dim() != table.value.cols()) throw DataError("replacement embeddings have the wrong dimension");
  table.value = emb.matrix.cast<Scalar>();
  table.value.row(kPadIndex).setZero();
  table.grad = nn::Matrix<Scalar>::Zero(table.value.rows(), table.value.cols());
  table.trainable = false;
}

inline int argmax_lowest(const auto& column) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(column.size()); ++k)
    if (column(k) > column(best)) best = k;
  return best;
}

/// Greedy decoding of many dialogues at once, batched by turn position.
/// With history, the class fed to turn t is the model's own argmax at t-1;
/// turn 0 gets the zero vector.
template <typename Scalar>
std::vector<std::vector<int>> predict_dialogues(nn::LayerGraph<Scalar>& graph,
                                                const std::vector<std::vector<std::vector<int>>>& dialogues,
                                                std::vector<std::vector<nn::Vector<Scalar>>>* probabilities = nullptr) {
  std::vector<std::vector<int>> out(dialogues.size());
  if (probabilities) probabilities->assign(dialogues.size(), {});
  std::size_t longest = 0;
  for (std::size_t d = 0; d < dialogues.size(); ++d) {
    out[d].assign(dialogues[d].size(), -1);
    longest = std::max(longest, dialogues[d].size());
  }
  const Index w = graph.window();
  for (std::size_t t = 0; t < longest; ++t) {
    std::vector<std::size_t> active;
    for (std::size_t d = 0; d < dialogues.size(); ++d)
      if (t < dialogues[d].size()) active.push_back(d);
    nn::Batch batch;
    batch.tokens.resize(w, static_cast<Index>(active.size()));
    for (std::size_t b = 0; b < active.size(); ++b) {
      const auto& ids = dialogues[active[b]][t];
      if (static_cast<Index>(ids.size()) != w) throw DataError("utterance is not windowed to the model width");
      for (Index i = 0; i < w; ++i) batch.tokens(i, static_cast<Index>(b)) = ids[static_cast<std::size_t>(i)];
      batch.previous.push_back(t == 0 ? -1 : out[active[b]][t - 1]);
    }
    const nn::Matrix<Scalar> logits = graph.forward(batch, false);
    const nn::Matrix<Scalar> probs = probabilities ? nn::softmax_columns(logits) : nn::Matrix<Scalar>();
    for (std::size_t b = 0; b < active.size(); ++b) {
      out[active[b]][t] = argmax_lowest(logits.col(static_cast<Index>(b)));
      if (probabilities) (*probabilities)[active[b]].push_back(probs.col(static_cast<Index>(b)));
    }
  }
  return out;
}

template <typename Scalar>
std::vector<int> predict_dialogue(nn::LayerGraph<Scalar>& graph, const std::vector<std::vector<int>>& utterances) {
  return predict_dialogues(graph, {utterances}).front();
}

}  // namespace dact
