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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dact/vocab.hpp"

namespace dact {

using VectorMap = std::map<std::string, Eigen::VectorXd>;

enum class EmbeddingMode { kStatic, kTrainable };

// |V| x dim embedding table; row r belongs to vocabulary index r. Row 0 (PAD) is zero.
struct EmbeddingMatrix {
  Eigen::MatrixXd matrix;
  EmbeddingMode mode = EmbeddingMode::kStatic;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index dim() const { return matrix.cols(); }
  bool trainable() const { return mode == EmbeddingMode::kTrainable; }
};

/// Reads the word2vec text format: an optional "count dim" header, then
/// "token v1 ... v_dim" per line.
VectorMap load_vectors(const std::filesystem::path& path);
VectorMap load_vectors(std::istream& in, const std::string& source_name = "<stream>");

/// Writes the text format with a header line, entries in map order,
/// components printed with round-trip precision.
void save_vectors(const VectorMap& vectors, const std::filesystem::path& path);
void write_vectors(const VectorMap& vectors, std::ostream& out);

/// Copies known rows from `vectors`; other non-PAD rows are drawn from
/// U(-0.25, 0.25) using `seed`. Row 0 stays zero.
EmbeddingMatrix build_matrix(const Vocabulary& vocab, const VectorMap& vectors, Eigen::Index dim,
                             EmbeddingMode mode, std::uint64_t seed);

}  // namespace dact
