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

#include "dact/models.hpp"

#include <algorithm>

namespace dact {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kCnn1: return "cnn1";
    case Architecture::kCnn2: return "cnn2";
    case Architecture::kBiLstm: return "bilstm";
  }
  return "?";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "cnn1") return Architecture::kCnn1;
  if (name == "cnn2") return Architecture::kCnn2;
  if (name == "bilstm") return Architecture::kBiLstm;
  throw DataError("unknown architecture '" + name + "' (expected cnn1, cnn2 or bilstm)");
}

std::string to_string(EmbeddingMode mode) { return mode == EmbeddingMode::kTrainable ? "trainable" : "static"; }

EmbeddingMode parse_embedding_mode(const std::string& name) {
  if (name == "static") return EmbeddingMode::kStatic;
  if (name == "trainable") return EmbeddingMode::kTrainable;
  throw DataError("unknown embedding mode '" + name + "'");
}

Index ModelConfig::max_kernel_height() const {
  switch (architecture) {
    case Architecture::kCnn1: return cnn1_kernel_height;
    case Architecture::kCnn2:
      return cnn2_kernel_heights.empty() ? 0 : *std::max_element(cnn2_kernel_heights.begin(), cnn2_kernel_heights.end());
    case Architecture::kBiLstm: return 1;
  }
  return 1;
}

void ModelConfig::validate() const {
  if (tag_count < 2) throw DataError("model needs at least two tags");
  if (emb_dim < 1) throw DataError("embedding dimension must be positive");
  if (window < 1) throw DataError("window must be positive");
  if (window < max_kernel_height()) {
    throw DataError("window " + std::to_string(window) + " is smaller than the kernel height " +
                    std::to_string(max_kernel_height()));
  }
  if (architecture == Architecture::kCnn2 && cnn2_kernel_heights.empty()) throw DataError("cnn2 needs kernel heights");
  if (dropout < 0.0 || dropout >= 1.0) throw DataError("dropout must be in [0, 1)");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"architecture", to_string(c.architecture)},
          {"window", c.window},
          {"emb_dim", c.emb_dim},
          {"use_history", c.use_history},
          {"tag_count", c.tag_count},
          {"embedding_mode", to_string(c.embedding_mode)},
          {"seed", c.seed},
          {"dropout", c.dropout},
          {"cnn1_kernels", c.cnn1_kernels},
          {"cnn1_kernel_height", c.cnn1_kernel_height},
          {"hidden_units", c.hidden_units},
          {"cnn2_kernels", c.cnn2_kernels},
          {"cnn2_kernel_heights", c.cnn2_kernel_heights},
          {"lstm_units", c.lstm_units}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  if (j.contains("architecture")) c.architecture = parse_architecture(j.at("architecture").get<std::string>());
  if (j.contains("embedding_mode")) c.embedding_mode = parse_embedding_mode(j.at("embedding_mode").get<std::string>());
  c.window = j.value("window", c.window);
  c.emb_dim = j.value("emb_dim", c.emb_dim);
  c.use_history = j.value("use_history", c.use_history);
  c.tag_count = j.value("tag_count", c.tag_count);
  c.seed = j.value("seed", c.seed);
  c.dropout = j.value("dropout", c.dropout);
  c.cnn1_kernels = j.value("cnn1_kernels", c.cnn1_kernels);
  c.cnn1_kernel_height = j.value("cnn1_kernel_height", c.cnn1_kernel_height);
  c.hidden_units = j.value("hidden_units", c.hidden_units);
  c.cnn2_kernels = j.value("cnn2_kernels", c.cnn2_kernels);
  c.cnn2_kernel_heights = j.value("cnn2_kernel_heights", c.cnn2_kernel_heights);
  c.lstm_units = j.value("lstm_units", c.lstm_units);
  return c;
}

Index feature_width(const ModelConfig& c) {
  switch (c.architecture) {
    case Architecture::kCnn1:
    case Architecture::kCnn2: return c.hidden_units;
    case Architecture::kBiLstm: return 2 * c.lstm_units;
  }
  return 0;
}

Index expected_parameter_count(const ModelConfig& c, Index vocab_size) {
  const Index e = c.emb_dim, k = c.tag_count;
  Index n = vocab_size * e;
  switch (c.architecture) {
    case Architecture::kCnn1:
      n += c.cnn1_kernels * c.cnn1_kernel_height + c.cnn1_kernels;
      n += c.cnn1_kernels * e * c.hidden_units + c.hidden_units;
      break;
    case Architecture::kCnn2: {
      for (Index h : c.cnn2_kernel_heights) n += c.cnn2_kernels * h * e + c.cnn2_kernels;
      const auto merged = c.cnn2_kernels * static_cast<Index>(c.cnn2_kernel_heights.size());
      n += merged * c.hidden_units + c.hidden_units;
      break;
    }
    case Architecture::kBiLstm: {
      const Index u = c.lstm_units;
      n += 2 * (4 * u * e + 4 * u * u + 4 * u);
      break;
    }
  }
  const Index head_in = feature_width(c) + (c.use_history ? k : 0);
  n += head_in * k + k;
  return n;
}

}  // namespace dact
