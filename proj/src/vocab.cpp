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

#include "dact/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace dact {

namespace {

using Count = std::pair<std::string, std::size_t>;

void sort_by_count(std::vector<Count>& counts) {
  std::sort(counts.begin(), counts.end(), [](const Count& a, const Count& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

bool is_reserved(const std::string& token) { return token == kPadToken || token == kUnkToken; }

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}, 0) {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens, std::size_t size_cap)
    : size_cap_(size_cap) {
  entries_ = {kPadToken, kUnkToken};
  index_[kPadToken] = kPadIndex;
  index_[kUnkToken] = kUnkIndex;
  for (const auto& t : tokens) {
    if (is_reserved(t)) continue;
    if (index_.emplace(t, static_cast<int>(entries_.size())).second) entries_.push_back(t);
  }
  if (size_cap_ == 0) size_cap_ = entries_.size() - 2;
}

int Vocabulary::index_of(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnkIndex : it->second;
}

std::unordered_map<std::string, std::size_t> count_tokens(const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& d : corpus.dialogues)
    for (const auto& u : d.utterances)
      for (const auto& t : u.tokens) ++counts[t];
  return counts;
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t cap) {
  if (cap < 1) throw DataError("vocabulary cap must be at least 1");
  if (corpus.utterance_count() == 0) throw DataError("cannot build a vocabulary from an empty corpus");
  const auto counts = count_tokens(corpus);
  std::vector<Count> sorted;
  for (const auto& [tok, n] : counts)
    if (!is_reserved(tok)) sorted.emplace_back(tok, n);
  sort_by_count(sorted);
  if (sorted.size() > cap) sorted.resize(cap);
  std::vector<std::string> tokens;
  tokens.reserve(sorted.size());
  for (const auto& [tok, n] : sorted) tokens.push_back(tok);
  return Vocabulary(tokens, cap);
}

Vocabulary build_union_vocab(const std::vector<Corpus>& corpora, std::size_t cap) {
  if (corpora.empty()) throw DataError("union vocabulary needs at least one corpus");
  std::unordered_map<std::string, std::size_t> total;
  std::set<std::string> members;
  for (const auto& corpus : corpora) {
    const auto vocab = build_vocab(corpus, cap);
    for (std::size_t i = 2; i < vocab.size(); ++i) members.insert(vocab.entries()[i]);
    for (const auto& [tok, n] : count_tokens(corpus)) total[tok] += n;
  }
  std::vector<Count> sorted;
  for (const auto& tok : members) sorted.emplace_back(tok, total[tok]);
  sort_by_count(sorted);
  std::vector<std::string> tokens;
  for (const auto& [tok, n] : sorted) tokens.push_back(tok);
  return Vocabulary(tokens, cap * corpora.size());
}

std::vector<int> encode(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.index_of(t));
  return ids;
}

std::vector<std::string> decode(const Vocabulary& vocab, const std::vector<int>& indices) {
  std::vector<std::string> tokens;
  tokens.reserve(indices.size());
  for (int i : indices) tokens.push_back(vocab.token(i));
  return tokens;
}

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary " + path.string());
  for (const auto& t : vocab.entries()) out << t << '\n';
}

Vocabulary load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < 2 || lines[0] != kPadToken || lines[1] != kUnkToken) {
    throw ParseError(path.string(), 1, "vocabulary must start with <PAD> and <UNK>");
  }
  std::set<std::string> seen;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty() || is_reserved(lines[i]) || !seen.insert(lines[i]).second)
      throw ParseError(path.string(), i + 1, "invalid or duplicate vocabulary entry");
  }
  return Vocabulary(std::vector<std::string>(lines.begin() + 2, lines.end()), 0);
}

}  // namespace dact
