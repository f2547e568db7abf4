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

#include "dact/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace dact {

namespace {

std::vector<std::string> split_spaces(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream in(line);
  std::string p;
  while (in >> p) parts.push_back(p);
  return parts;
}

bool parse_double(const std::string& text, double& value) {
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, value);
  return ec == std::errc() && ptr == last && std::isfinite(value);
}

bool looks_like_header(const std::vector<std::string>& parts) {
  if (parts.size() != 2) return false;
  for (const auto& p : parts)
    for (char c : p)
      if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

VectorMap load_vectors(std::istream& in, const std::string& source_name) {
  VectorMap vectors;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index dim = -1;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto parts = split_spaces(line);
    if (parts.empty()) continue;
    if (first) {
      first = false;
      if (looks_like_header(parts)) {
        dim = std::stol(parts[1]);
        if (dim < 1) throw ParseError(source_name, line_no, "header dimension must be positive");
        continue;
      }
    }
    const auto n = static_cast<Eigen::Index>(parts.size()) - 1;
    if (dim < 0) dim = n;
    if (n != dim) {
      throw ParseError(source_name, line_no,
                       "expected " + std::to_string(dim) + " components, found " + std::to_string(n));
    }
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (!parse_double(parts[static_cast<std::size_t>(i) + 1], v(i))) {
        throw ParseError(source_name, line_no,
                         "component '" + parts[static_cast<std::size_t>(i) + 1] + "' is not a finite number");
      }
    }
    vectors[parts[0]] = std::move(v);
  }
  return vectors;
}

VectorMap load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vector file " + path.string());
  return load_vectors(in, path.string());
}

void write_vectors(const VectorMap& vectors, std::ostream& out) {
  const auto dim = vectors.empty() ? 0 : vectors.begin()->second.size();
  out << vectors.size() << ' ' << dim << '\n';
  out << std::setprecision(17);
  for (const auto& [tok, v] : vectors) {
    out << tok;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v(i);
    out << '\n';
  }
}

void save_vectors(const VectorMap& vectors, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vector file " + path.string());
  write_vectors(vectors, out);
}

EmbeddingMatrix build_matrix(const Vocabulary& vocab, const VectorMap& vectors, Eigen::Index dim,
                             EmbeddingMode mode, std::uint64_t seed) {
  if (dim < 1) throw DataError("embedding dimension must be positive");
  for (const auto& [tok, v] : vectors) {
    if (v.size() != dim) {
      throw DataError("vector for '" + tok + "' has dimension " + std::to_string(v.size()) +
                      ", expected " + std::to_string(dim));
    }
  }
  EmbeddingMatrix emb;
  emb.mode = mode;
  emb.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocab.size()), dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.25, 0.25);
  for (std::size_t r = 1; r < vocab.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    // Draw for every row so the stream does not depend on which tokens hit.
    for (Eigen::Index c = 0; c < dim; ++c) emb.matrix(row, c) = uniform(rng);
    const auto it = vectors.find(vocab.entries()[r]);
    if (it != vectors.end()) emb.matrix.row(row) = it->second.transpose();
  }
  return emb;
}

}  // namespace dact
