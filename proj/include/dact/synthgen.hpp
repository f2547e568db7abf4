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
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dact/align.hpp"
#include "dact/corpus.hpp"
#include "dact/embeddings.hpp"

namespace dact {

// Recipe for a synthetic bilingual dialogue-act corpus.
//
// Every tag owns a pool of content tokens and a set of templates built from it
// (plus shared filler tokens). Utterances are template emissions, tag sequences
// follow a Markov chain, and language 2 is language 1 under a token bijection
// whose embedding space is an orthogonal rotation of language 1's plus noise.
struct SynthSpec {
  Index tag_count = 5;
  Index templates_per_tag = 4;
  Index min_template_length = 3;
  Index max_template_length = 8;
  Index vocab_size = 200;           // tokens per language
  Index filler_tokens = 20;         // shared across tags
  double filler_rate = 0.25;        // chance a template slot uses a filler token
  double token_noise = 0.0;         // chance an emitted token is replaced by a random token
  Eigen::MatrixXd transitions;      // K x K, rows sum to 1; empty = uniform
  Eigen::VectorXd initial;          // first-turn distribution; empty = stationary
  std::vector<std::pair<Index, Index>> ambiguous_pairs;   // second tag reuses the first tag's templates
  Index train_utterances = 500;
  Index test_utterances = 200;
  Index dialogue_length = 8;
  Index emb_dim = 16;
  double embedding_scale = 0.5;     // std of language-1 vector components
  double noise = 0.0;               // std of language-2 noise, in units of embedding_scale
  bool parallel = true;             // language-2 dialogues translate language-1 dialogues
  std::string language1 = "en";
  std::string language2 = "de";
  std::uint64_t seed = 1;

  void validate() const;
  Eigen::MatrixXd transition_matrix() const;
};

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

/// Disjoint templates and uniform transitions: a no-history model can be perfect.
SynthSpec separable_spec(Index tags, Index train, Index test, std::uint64_t seed);

/// Deterministic cyclic transitions with tags 0 and 2 sharing templates; only
/// the previous act tells them apart. Dialogues start on a non-ambiguous tag.
SynthSpec ambiguity_spec(Index tags, Index train, Index test, std::uint64_t seed);

struct SynthData {
  std::vector<std::string> tags;                     // synthetic tag index -> name
  std::vector<std::vector<std::vector<Index>>> templates;   // per tag, token indices
  Corpus train1, test1, train2, test2;
  VectorMap vectors1, vectors2;
  BilingualLexicon lexicon;                          // (language-2 token, language-1 token)
  Eigen::MatrixXd rotation;                          // vectors2 = vectors1 * rotation + noise
  Eigen::VectorXd stationary;

  const Corpus& train(const std::string& lang, const SynthSpec& spec) const;
};

std::string tag_name(Index tag, Index tag_count);
std::string token_name(const std::string& language, Index index);

/// Stationary distribution of an irreducible transition matrix.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transitions);

SynthData generate(const SynthSpec& spec);

/// Writes <l1>_train.tsv, <l1>_test.tsv, <l2>_train.tsv, <l2>_test.tsv,
/// <l1>.vec, <l2>.vec, lexicon.tsv and data.json (a ready-made "data" config block).
nlohmann::json write_synth(const SynthData& data, const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace dact
