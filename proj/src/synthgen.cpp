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

#include "dact/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace dact {

namespace {

constexpr std::array<const char*, 16> kActNames{
    "feedback", "suggest", "inform",      "request",   "greet",   "close",  "init",      "deliberate",
    "bye",      "commit",  "thank",       "politeness_formula", "backchannel", "introduce", "defer", "offer"};

Index sample_index(const Eigen::VectorXd& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (r < acc) return i;
  }
  return probs.size() - 1;
}

// Tag sequences grouped into dialogues, totalling exactly `utterances` turns.
std::vector<std::vector<Index>> sample_dialogues(const SynthSpec& spec, const Eigen::MatrixXd& trans,
                                                 const Eigen::VectorXd& initial, Index utterances,
                                                 std::mt19937_64& rng) {
  std::vector<std::vector<Index>> dialogues;
  Index remaining = utterances;
  while (remaining > 0) {
    const Index len = std::min(spec.dialogue_length, remaining);
    std::vector<Index> tags;
    tags.push_back(sample_index(initial, rng));
    while (static_cast<Index>(tags.size()) < len) tags.push_back(sample_index(trans.row(tags.back()).transpose(), rng));
    remaining -= len;
    dialogues.push_back(std::move(tags));
  }
  return dialogues;
}

Corpus realize(const std::vector<std::vector<Index>>& dialogues, const std::vector<std::vector<Index>>& emissions,
               const std::vector<std::string>& tags, const std::string& language,
               const std::vector<Index>& token_map, const std::string& split) {
  Corpus corpus;
  std::size_t e = 0;
  for (std::size_t d = 0; d < dialogues.size(); ++d) {
    char id[48];
    std::snprintf(id, sizeof(id), "%s-%s-%05zu", language.c_str(), split.c_str(), d);
    Dialogue dialogue{id, {}};
    for (std::size_t t = 0; t < dialogues[d].size(); ++t, ++e) {
      Utterance u;
      u.turn = static_cast<int>(t);
      u.language = language;
      u.da_tag = tags[static_cast<std::size_t>(dialogues[d][t])];
      for (Index tok : emissions[e]) u.tokens.push_back(token_name(language, token_map[static_cast<std::size_t>(tok)]));
      dialogue.utterances.push_back(std::move(u));
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  finalize_corpus(corpus);
  return corpus;
}

std::vector<std::vector<Index>> emit(const SynthSpec& spec, const std::vector<std::vector<Index>>& dialogues,
                                     const std::vector<std::vector<std::vector<Index>>>& templates,
                                     std::mt19937_64& rng) {
  std::vector<std::vector<Index>> out;
  std::bernoulli_distribution corrupt(spec.token_noise);
  std::uniform_int_distribution<Index> any_token(0, spec.vocab_size - 1);
  for (const auto& d : dialogues) {
    for (Index tag : d) {
      const auto& options = templates[static_cast<std::size_t>(tag)];
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      auto tokens = options[pick(rng)];
      if (spec.token_noise > 0.0)
        for (auto& t : tokens)
          if (corrupt(rng)) t = any_token(rng);
      out.push_back(std::move(tokens));
    }
  }
  return out;
}

Eigen::MatrixXd random_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) m(r, c) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd d = qr.matrixQR().diagonal();
  for (Index c = 0; c < n; ++c)
    if (d(c) < 0) q.col(c) *= -1.0;
  return q;
}

}  // namespace

std::string tag_name(Index tag, Index tag_count) {
  if (tag_count <= static_cast<Index>(kActNames.size())) return kActNames[static_cast<std::size_t>(tag)];
  char buf[32];
  std::snprintf(buf, sizeof(buf), "act%03td", tag);
  return buf;
}

std::string token_name(const std::string& language, Index index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%04td", language.c_str(), index);
  return buf;
}

void SynthSpec::validate() const {
  if (tag_count < 2) throw DataError("synthetic corpus needs at least two tags");
  if (templates_per_tag < 1) throw DataError("templates_per_tag must be positive");
  if (min_template_length < 1 || max_template_length < min_template_length)
    throw DataError("invalid template length range");
  if (filler_tokens < 0 || vocab_size < filler_tokens + tag_count)
    throw DataError("vocab_size must leave at least one content token per tag");
  if (filler_tokens == 0 && filler_rate > 0.0) throw DataError("filler_rate > 0 needs filler tokens");
  if (filler_rate < 0.0 || filler_rate > 1.0 || token_noise < 0.0 || token_noise > 1.0)
    throw DataError("rates must lie in [0, 1]");
  if (train_utterances < 0 || test_utterances < 0 || dialogue_length < 1) throw DataError("invalid split sizes");
  if (emb_dim < 1 || embedding_scale <= 0.0 || noise < 0.0) throw DataError("invalid embedding settings");
  if (language1.empty() || language2.empty() || language1 == language2)
    throw DataError("the two languages need distinct non-empty codes");
  const auto t = transition_matrix();
  if (t.rows() != tag_count || t.cols() != tag_count) throw DataError("transition matrix must be K x K");
  for (Index r = 0; r < tag_count; ++r) {
    if ((t.row(r).array() < 0).any() || std::abs(t.row(r).sum() - 1.0) > 1e-9)
      throw DataError("transition matrix row " + std::to_string(r) + " is not a distribution");
  }
  if (initial.size() != 0) {
    if (initial.size() != tag_count || (initial.array() < 0).any() || std::abs(initial.sum() - 1.0) > 1e-9)
      throw DataError("initial distribution is invalid");
  }
  for (const auto& [a, b] : ambiguous_pairs) {
    if (a < 0 || b < 0 || a >= tag_count || b >= tag_count || a == b)
      throw DataError("ambiguity pair outside the tag set");
  }
}

Eigen::MatrixXd SynthSpec::transition_matrix() const {
  if (transitions.size() != 0) return transitions;
  return Eigen::MatrixXd::Constant(tag_count, tag_count, 1.0 / static_cast<double>(tag_count));
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transitions) {
  const Index k = transitions.rows();
  Eigen::MatrixXd a = transitions.transpose() - Eigen::MatrixXd::Identity(k, k);
  a.row(k - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b(k - 1) = 1.0;
  return a.colPivHouseholderQr().solve(b);
}

SynthSpec separable_spec(Index tags, Index train, Index test, std::uint64_t seed) {
  SynthSpec s;
  s.tag_count = tags;
  s.train_utterances = train;
  s.test_utterances = test;
  s.seed = seed;
  return s;
}

SynthSpec ambiguity_spec(Index tags, Index train, Index test, std::uint64_t seed) {
  SynthSpec s = separable_spec(tags, train, test, seed);
  s.transitions = Eigen::MatrixXd::Zero(tags, tags);
  for (Index k = 0; k < tags; ++k) s.transitions(k, (k + 1) % tags) = 1.0;
  s.ambiguous_pairs = {{0, 2}};
  s.initial = Eigen::VectorXd::Zero(tags);
  // Start anywhere except the ambiguous pair, so every ambiguous turn has a history.
  for (Index k = 0; k < tags; ++k)
    if (k != 0 && k != 2) s.initial(k) = 1.0;
  s.initial /= s.initial.sum();
  return s;
}

const Corpus& SynthData::train(const std::string& lang, const SynthSpec& spec) const {
  if (lang == spec.language1) return train1;
  if (lang == spec.language2) return train2;
  throw DataError("unknown synthetic language '" + lang + "'");
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  SynthData data;
  const Index k = spec.tag_count;
  for (Index t = 0; t < k; ++t) data.tags.push_back(tag_name(t, k));

  // Sub-seeds per stage keep each stage stable when another stage's knobs change.
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32), 0xDAC7u};
  std::vector<std::uint64_t> sub(8);
  {
    std::vector<std::uint32_t> words(16);
    seq.generate(words.begin(), words.end());
    for (std::size_t i = 0; i < sub.size(); ++i) sub[i] = (std::uint64_t{words[2 * i]} << 32) | words[2 * i + 1];
  }
  std::mt19937_64 template_rng(sub[0]), train_rng(sub[1]), test_rng(sub[2]), emb_rng(sub[3]), perm_rng(sub[4]),
      train2_rng(sub[5]), test2_rng(sub[6]);

  // Content pools: tokens [filler_tokens, vocab_size) split evenly across tags.
  const Index content = spec.vocab_size - spec.filler_tokens;
  const Index per_tag = content / k;
  data.templates.resize(static_cast<std::size_t>(k));
  std::uniform_int_distribution<Index> length(spec.min_template_length, spec.max_template_length);
  std::bernoulli_distribution filler(spec.filler_rate);
  for (Index t = 0; t < k; ++t) {
    std::uniform_int_distribution<Index> own(spec.filler_tokens + t * per_tag, spec.filler_tokens + (t + 1) * per_tag - 1);
    std::uniform_int_distribution<Index> shared(0, std::max<Index>(spec.filler_tokens - 1, 0));
    for (Index m = 0; m < spec.templates_per_tag; ++m) {
      std::vector<Index> tpl;
      const Index len = length(template_rng);
      for (Index i = 0; i < len; ++i) {
        const bool use_filler = i > 0 && spec.filler_tokens > 0 && filler(template_rng);
        tpl.push_back(use_filler ? shared(template_rng) : own(template_rng));
      }
      data.templates[static_cast<std::size_t>(t)].push_back(std::move(tpl));
    }
  }
  for (const auto& [a, b] : spec.ambiguous_pairs) data.templates[static_cast<std::size_t>(b)] = data.templates[static_cast<std::size_t>(a)];

  const Eigen::MatrixXd trans = spec.transition_matrix();
  data.stationary = stationary_distribution(trans);
  const Eigen::VectorXd initial = spec.initial.size() ? spec.initial : data.stationary;

  const auto train_tags = sample_dialogues(spec, trans, initial, spec.train_utterances, train_rng);
  const auto test_tags = sample_dialogues(spec, trans, initial, spec.test_utterances, test_rng);
  const auto train_emit = emit(spec, train_tags, data.templates, train_rng);
  const auto test_emit = emit(spec, test_tags, data.templates, test_rng);

  std::vector<Index> identity(static_cast<std::size_t>(spec.vocab_size));
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<Index> bijection = identity;
  std::shuffle(bijection.begin(), bijection.end(), perm_rng);

  data.train1 = realize(train_tags, train_emit, data.tags, spec.language1, identity, "train");
  data.test1 = realize(test_tags, test_emit, data.tags, spec.language1, identity, "test");
  if (spec.parallel) {
    data.train2 = realize(train_tags, train_emit, data.tags, spec.language2, bijection, "train");
    data.test2 = realize(test_tags, test_emit, data.tags, spec.language2, bijection, "test");
  } else {
    const auto tags2 = sample_dialogues(spec, trans, initial, spec.train_utterances, train2_rng);
    const auto test_tags2 = sample_dialogues(spec, trans, initial, spec.test_utterances, test2_rng);
    data.train2 = realize(tags2, emit(spec, tags2, data.templates, train2_rng), data.tags, spec.language2, bijection, "train");
    data.test2 = realize(test_tags2, emit(spec, test_tags2, data.templates, test2_rng), data.tags, spec.language2,
                         bijection, "test");
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd base(spec.vocab_size, spec.emb_dim);
  for (Index r = 0; r < spec.vocab_size; ++r)
    for (Index c = 0; c < spec.emb_dim; ++c) base(r, c) = spec.embedding_scale * gauss(emb_rng);
  data.rotation = random_orthogonal(spec.emb_dim, emb_rng);
  Eigen::MatrixXd rotated = base * data.rotation;
  if (spec.noise > 0.0) {
    for (Index r = 0; r < spec.vocab_size; ++r)
      for (Index c = 0; c < spec.emb_dim; ++c) rotated(r, c) += spec.noise * spec.embedding_scale * gauss(emb_rng);
  }
  for (Index i = 0; i < spec.vocab_size; ++i) {
    const auto j = bijection[static_cast<std::size_t>(i)];
    data.vectors1[token_name(spec.language1, i)] = base.row(i).transpose();
    data.vectors2[token_name(spec.language2, j)] = rotated.row(i).transpose();
    data.lexicon.pairs.emplace_back(token_name(spec.language2, j), token_name(spec.language1, i));
  }
  return data;
}

nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json j{{"tag_count", s.tag_count},
                   {"templates_per_tag", s.templates_per_tag},
                   {"min_template_length", s.min_template_length},
                   {"max_template_length", s.max_template_length},
                   {"vocab_size", s.vocab_size},
                   {"filler_tokens", s.filler_tokens},
                   {"filler_rate", s.filler_rate},
                   {"token_noise", s.token_noise},
                   {"train_utterances", s.train_utterances},
                   {"test_utterances", s.test_utterances},
                   {"dialogue_length", s.dialogue_length},
                   {"emb_dim", s.emb_dim},
                   {"embedding_scale", s.embedding_scale},
                   {"noise", s.noise},
                   {"parallel", s.parallel},
                   {"language1", s.language1},
                   {"language2", s.language2},
                   {"seed", s.seed}};
  if (s.transitions.size()) {
    auto rows = nlohmann::json::array();
    for (Index r = 0; r < s.transitions.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(s.transitions.cols()));
      for (Index c = 0; c < s.transitions.cols(); ++c) row[static_cast<std::size_t>(c)] = s.transitions(r, c);
      rows.push_back(row);
    }
    j["transitions"] = rows;
  }
  if (s.initial.size()) j["initial"] = std::vector<double>(s.initial.data(), s.initial.data() + s.initial.size());
  auto pairs = nlohmann::json::array();
  for (const auto& [a, b] : s.ambiguous_pairs) pairs.push_back({a, b});
  j["ambiguous_pairs"] = pairs;
  return j;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  // A preset provides the defaults that the remaining keys override.
  const auto preset = j.value("preset", std::string("separable"));
  const Index tags = j.value("tag_count", s.tag_count);
  if (preset == "ambiguity") {
    s = ambiguity_spec(tags, s.train_utterances, s.test_utterances, s.seed);
  } else if (preset != "separable") {
    throw DataError("unknown synthetic preset '" + preset + "'");
  }
  s.tag_count = tags;
  s.templates_per_tag = j.value("templates_per_tag", s.templates_per_tag);
  s.min_template_length = j.value("min_template_length", s.min_template_length);
  s.max_template_length = j.value("max_template_length", s.max_template_length);
  s.vocab_size = j.value("vocab_size", s.vocab_size);
  s.filler_tokens = j.value("filler_tokens", s.filler_tokens);
  s.filler_rate = j.value("filler_rate", s.filler_rate);
  s.token_noise = j.value("token_noise", s.token_noise);
  s.train_utterances = j.value("train_utterances", s.train_utterances);
  s.test_utterances = j.value("test_utterances", s.test_utterances);
  s.dialogue_length = j.value("dialogue_length", s.dialogue_length);
  s.emb_dim = j.value("emb_dim", s.emb_dim);
  s.embedding_scale = j.value("embedding_scale", s.embedding_scale);
  s.noise = j.value("noise", s.noise);
  s.parallel = j.value("parallel", s.parallel);
  s.language1 = j.value("language1", s.language1);
  s.language2 = j.value("language2", s.language2);
  s.seed = j.value("seed", s.seed);
  if (j.contains("transitions")) {
    const auto rows = j.at("transitions").get<std::vector<std::vector<double>>>();
    s.transitions.resize(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Index>(rows[r].size()) != s.transitions.cols()) throw DataError("ragged transition matrix");
      for (std::size_t c = 0; c < rows[r].size(); ++c) s.transitions(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  if (j.contains("initial")) {
    const auto v = j.at("initial").get<std::vector<double>>();
    s.initial = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
  }
  if (j.contains("ambiguous_pairs")) {
    s.ambiguous_pairs.clear();
    for (const auto& p : j.at("ambiguous_pairs")) s.ambiguous_pairs.emplace_back(p.at(0).get<Index>(), p.at(1).get<Index>());
  }
  return s;
}

nlohmann::json write_synth(const SynthData& data, const SynthSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& l1 = spec.language1;
  const auto& l2 = spec.language2;
  write_corpus(data.train1, dir / (l1 + "_train.tsv"));
  write_corpus(data.test1, dir / (l1 + "_test.tsv"));
  write_corpus(data.train2, dir / (l2 + "_train.tsv"));
  write_corpus(data.test2, dir / (l2 + "_test.tsv"));
  save_vectors(data.vectors1, dir / (l1 + ".vec"));
  save_vectors(data.vectors2, dir / (l2 + ".vec"));
  save_lexicon(data.lexicon, dir / "lexicon.tsv");
  nlohmann::json block;
  block["languages"][l1] = {{"train", l1 + "_train.tsv"}, {"test", l1 + "_test.tsv"}, {"vectors", l1 + ".vec"}};
  block["languages"][l2] = {{"train", l2 + "_train.tsv"}, {"test", l2 + "_test.tsv"}, {"vectors", l2 + ".vec"}};
  block["lexicon"] = {{"path", "lexicon.tsv"}, {"columns", {l2, l1}}};
  std::ofstream out(dir / "data.json");
  out << block.dump(2) << '\n';
  return block;
}

}  // namespace dact
