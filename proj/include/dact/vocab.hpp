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
#include <string>
#include <unordered_map>
#include <vector>

#include "dact/corpus.hpp"

namespace dact {

// Token <-> index map. Index 0 is <PAD>, index 1 is <UNK>.
class Vocabulary {
 public:
  Vocabulary();
  Vocabulary(const std::vector<std::string>& tokens, std::size_t size_cap);

  std::size_t size() const { return entries_.size(); }
  std::size_t size_cap() const { return size_cap_; }
  const std::vector<std::string>& entries() const { return entries_; }
  const std::string& token(int index) const { return entries_.at(static_cast<std::size_t>(index)); }

  // Returns kUnkIndex for unknown tokens.
  int index_of(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  bool operator==(const Vocabulary& other) const { return entries_ == other.entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
  std::size_t size_cap_ = 0;
};

/// Token counts over every utterance of the corpus.
std::unordered_map<std::string, std::size_t> count_tokens(const Corpus& corpus);

/// The `cap` most frequent tokens; ties broken lexicographically.
Vocabulary build_vocab(const Corpus& corpus, std::size_t cap);

/// Union of the per-corpus top-`cap` sets. Shared surface forms get one entry.
/// Entries are ordered by total count (descending), then lexicographically.
Vocabulary build_union_vocab(const std::vector<Corpus>& corpora, std::size_t cap);

std::vector<int> encode(const Vocabulary& vocab, const std::vector<std::string>& tokens);
std::vector<std::string> decode(const Vocabulary& vocab, const std::vector<int>& indices);

// One token per line; the first two lines are <PAD> and <UNK>.
void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocab(const std::filesystem::path& path);

}  // namespace dact
