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
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dact/common.hpp"

namespace dact {

struct Utterance {
  int turn = 0;
  std::vector<std::string> tokens;
  std::string da_tag;
  std::string language;

  bool operator==(const Utterance&) const = default;
};

// Utterances are kept in turn order; that order is the history order.
struct Dialogue {
  std::string id;
  std::vector<Utterance> utterances;

  bool operator==(const Dialogue&) const = default;
};

struct Corpus {
  std::vector<Dialogue> dialogues;     // sorted by id
  std::vector<std::string> tag_set;    // sorted lexicographically
  std::set<std::string> languages;

  std::size_t utterance_count() const;
  bool operator==(const Corpus&) const = default;
};

struct CorpusStats {
  std::size_t dialogue_count = 0;
  std::size_t da_count = 0;
  std::size_t word_count = 0;
  std::map<std::string, std::size_t> tag_histogram;
};

/// Parses the 5-column TSV ingest format:
///   dialogue_id <TAB> turn_index <TAB> language <TAB> da_tag <TAB> text
/// Text is lowercased (ASCII) and split on whitespace. Blank lines and lines
/// starting with '#' are skipped.
Corpus parse_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in, const std::string& source_name = "<stream>");

/// Writes the ingest format; parse_corpus(serialize(c)) == c.
void serialize_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Recomputes tag_set and languages from the dialogues; sorts dialogues and turns.
void finalize_corpus(Corpus& corpus);

/// Merges corpora (e.g. several languages) into one; the tag set becomes the union.
Corpus merge_corpora(const std::vector<Corpus>& corpora);

CorpusStats compute_stats(const Corpus& corpus);

/// Truncates to the first `w` tokens or right-pads with <PAD>.
std::vector<std::string> window(const std::vector<std::string>& tokens, std::size_t w);

std::vector<std::string> tokenize(const std::string& text);

}  // namespace dact
