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

#include <fstream>

#include <json.hpp>

#include "dact/align.hpp"

namespace dact {

namespace {

using json = nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw ParseError("CCA matrix row count mismatch");
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = data.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("CCA matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

BilingualLexicon load_lexicon(const std::filesystem::path& path, bool swap) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon " + path.string());
  BilingualLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(path.string(), line_no, "expected two tab-separated tokens");
    }
    auto a = line.substr(0, tab);
    auto b = line.substr(tab + 1);
    if (a.empty() || b.empty()) throw ParseError(path.string(), line_no, "empty lexicon token");
    if (swap) std::swap(a, b);
    lexicon.pairs.emplace_back(std::move(a), std::move(b));
  }
  if (lexicon.pairs.empty()) throw ParseError("lexicon " + path.string() + " is empty");
  return lexicon;
}

void save_lexicon(const BilingualLexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write lexicon " + path.string());
  for (const auto& [src, piv] : lexicon.pairs) out << src << '\t' << piv << '\n';
}

LexiconMatrices lexicon_matrices(const BilingualLexicon& lexicon, const VectorMap& source,
                                 const VectorMap& pivot) {
  std::vector<const Eigen::VectorXd*> xs, ys;
  LexiconMatrices out;
  for (const auto& [s, p] : lexicon.pairs) {
    const auto si = source.find(s);
    const auto pi = pivot.find(p);
    if (si == source.end() || pi == pivot.end()) {
      ++out.dropped;
      continue;
    }
    xs.push_back(&si->second);
    ys.push_back(&pi->second);
  }
  if (xs.empty()) throw DataError("no lexicon pair has vectors on both sides");
  const auto dim = xs.front()->size();
  out.source.resize(static_cast<Eigen::Index>(xs.size()), dim);
  out.pivot.resize(static_cast<Eigen::Index>(ys.size()), ys.front()->size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.source.row(static_cast<Eigen::Index>(i)) = xs[i]->transpose();
    out.pivot.row(static_cast<Eigen::Index>(i)) = ys[i]->transpose();
  }
  return out;
}

void save_cca(const CcaModel<double>& model, const std::filesystem::path& path) {
  json j;
  j["format"] = "dact-cca";
  j["version"] = 1;
  j["ridge"] = model.ridge;
  j["mean_src"] = matrix_to_json(model.mean_src);
  j["mean_piv"] = matrix_to_json(model.mean_piv);
  j["w_src"] = matrix_to_json(model.w_src);
  j["w_piv"] = matrix_to_json(model.w_piv);
  j["correlations"] = matrix_to_json(model.correlations);
  j["transform"] = matrix_to_json(model.transform);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write CCA model " + path.string());
  out << j.dump(1) << '\n';
}

CcaModel<double> load_cca(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CCA model " + path.string());
  try {
    const auto j = json::parse(in);
    if (j.at("format") != "dact-cca" || j.at("version") != 1) throw ParseError("unsupported CCA model file");
    CcaModel<double> model;
    model.ridge = j.at("ridge").get<double>();
    model.mean_src = matrix_from_json(j.at("mean_src"));
    model.mean_piv = matrix_from_json(j.at("mean_piv"));
    model.w_src = matrix_from_json(j.at("w_src"));
    model.w_piv = matrix_from_json(j.at("w_piv"));
    model.correlations = matrix_from_json(j.at("correlations"));
    model.transform = matrix_from_json(j.at("transform"));
    if (model.transform.rows() != model.dim() || model.transform.cols() != model.mean_piv.size())
      throw ParseError("CCA model matrices have inconsistent shapes");
    return model;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace dact
