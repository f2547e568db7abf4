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

#include "dact/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace dact {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool parse_int(const std::string& text, int& value) {
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::size_t Corpus::utterance_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.utterances.size();
  return n;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::string lowered = text;
  // ASCII-only lowercasing; multi-byte UTF-8 sequences pass through untouched.
  for (auto& ch : lowered) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  std::istringstream in(lowered);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

void finalize_corpus(Corpus& corpus) {
  std::sort(corpus.dialogues.begin(), corpus.dialogues.end(),
            [](const Dialogue& a, const Dialogue& b) { return a.id < b.id; });
  std::set<std::string> tags;
  corpus.languages.clear();
  for (auto& d : corpus.dialogues) {
    std::stable_sort(d.utterances.begin(), d.utterances.end(),
                     [](const Utterance& a, const Utterance& b) { return a.turn < b.turn; });
    for (const auto& u : d.utterances) {
      tags.insert(u.da_tag);
      corpus.languages.insert(u.language);
    }
  }
  corpus.tag_set.assign(tags.begin(), tags.end());
}

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
  std::unordered_map<std::string, std::size_t> dialogue_slot;
  Corpus corpus;
  std::set<std::pair<std::string, int>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw ParseError(source_name, line_no,
                       "expected 5 tab-separated fields, found " + std::to_string(fields.size()));
    }
    Utterance u;
    if (!parse_int(fields[1], u.turn)) {
      throw ParseError(source_name, line_no, "turn index '" + fields[1] + "' is not an integer");
    }
    if (fields[0].empty()) throw ParseError(source_name, line_no, "empty dialogue id");
    if (fields[2].empty()) throw ParseError(source_name, line_no, "empty language code");
    if (fields[3].empty()) throw ParseError(source_name, line_no, "empty dialogue act tag");
    u.language = fields[2];
    u.da_tag = fields[3];
    u.tokens = tokenize(fields[4]);
    if (u.tokens.empty()) throw ParseError(source_name, line_no, "utterance has no tokens");
    if (!seen.emplace(fields[0], u.turn).second) {
      throw ParseError(source_name, line_no,
                       "duplicate turn " + fields[1] + " in dialogue '" + fields[0] + "'");
    }
    auto [it, inserted] = dialogue_slot.emplace(fields[0], corpus.dialogues.size());
    if (inserted) corpus.dialogues.push_back(Dialogue{fields[0], {}});
    corpus.dialogues[it->second].utterances.push_back(std::move(u));
  }
  if (corpus.dialogues.empty()) throw ParseError(source_name + ": corpus file contains no utterances");
  finalize_corpus(corpus);
  return corpus;
}

Corpus parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& d : corpus.dialogues) {
    for (const auto& u : d.utterances) {
      out << d.id << '\t' << u.turn << '\t' << u.language << '\t' << u.da_tag << '\t';
      for (std::size_t i = 0; i < u.tokens.size(); ++i) {
        if (i) out << ' ';
        out << u.tokens[i];
      }
      out << '\n';
    }
  }
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  serialize_corpus(corpus, out);
}

Corpus merge_corpora(const std::vector<Corpus>& corpora) {
  Corpus merged;
  std::set<std::string> ids;
  for (const auto& c : corpora) {
    for (const auto& d : c.dialogues) {
      Dialogue copy = d;
      // Dialogue ids may collide across languages; prefix with the language.
      if (!ids.insert(copy.id).second) {
        const std::string lang = d.utterances.empty() ? "x" : d.utterances.front().language;
        copy.id = lang + ":" + copy.id;
        if (!ids.insert(copy.id).second) throw DataError("dialogue id collision: " + d.id);
      }
      merged.dialogues.push_back(std::move(copy));
    }
  }
  finalize_corpus(merged);
  return merged;
}

CorpusStats compute_stats(const Corpus& corpus) {
  CorpusStats stats;
  for (const auto& tag : corpus.tag_set) stats.tag_histogram[tag] = 0;
  stats.dialogue_count = corpus.dialogues.size();
  for (const auto& d : corpus.dialogues) {
    for (const auto& u : d.utterances) {
      ++stats.da_count;
      stats.word_count += u.tokens.size();
      ++stats.tag_histogram[u.da_tag];
    }
  }
  return stats;
}

std::vector<std::string> window(const std::vector<std::string>& tokens, std::size_t w) {
  std::vector<std::string> out(tokens.begin(), tokens.begin() + std::min(w, tokens.size()));
  out.resize(w, kPadToken);
  return out;
}

}  // namespace dact
