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

#include <memory>
#include <vector>

#include "dact/nn/layers.hpp"

namespace dact::nn {

// Inputs of one minibatch. `previous` holds the history class per sample
// (-1 means no history: the zero vector); `targets` may be empty at inference.
struct Batch {
  Eigen::MatrixXi tokens;          // window x batch
  std::vector<int> previous;
  std::vector<int> targets;

  Index size() const { return tokens.cols(); }
};

// embedding -> body -> [concat one-hot history] -> dense head (logits).
template <typename Scalar>
class LayerGraph {
 public:
  LayerGraph(Embedding<Scalar> embedding, LayerPtr<Scalar> body, Index classes, bool use_history,
             std::mt19937_64& rng)
      : embedding_(std::move(embedding)), body_(std::move(body)), classes_(classes), use_history_(use_history) {
    if (classes < 2) throw DataError("a classifier needs at least two classes");
    head_ = std::make_unique<Dense<Scalar>>("output", head_input_size(), classes, rng);
  }

  Index classes() const { return classes_; }
  bool use_history() const { return use_history_; }
  Index feature_size() const { return body_->output_size(); }
  Index head_input_size() const { return feature_size() + (use_history_ ? classes_ : 0); }
  Index window() const { return body_->input_size() / embedding_.dim(); }

  Embedding<Scalar>& embedding() { return embedding_; }
  const Embedding<Scalar>& embedding() const { return embedding_; }
  Layer<Scalar>& body() { return *body_; }

  // All parameters in a fixed order: embedding, body layers, output head.
  std::vector<Parameter<Scalar>*> parameters() {
    std::vector<Parameter<Scalar>*> out{&embedding_.table()};
    for (auto* p : body_->parameters()) out.push_back(p);
    for (auto* p : head_->parameters()) out.push_back(p);
    return out;
  }

  std::vector<Parameter<Scalar>*> trainable_parameters() {
    std::vector<Parameter<Scalar>*> out;
    for (auto* p : parameters())
      if (p->trainable) out.push_back(p);
    return out;
  }

  Index parameter_count() {
    Index n = 0;
    for (auto* p : parameters()) n += p->size();
    return n;
  }

  Matrix<Scalar> history_matrix(const std::vector<int>& previous, Index batch) const {
    Matrix<Scalar> h = Matrix<Scalar>::Zero(classes_, batch);
    for (Index b = 0; b < batch && b < static_cast<Index>(previous.size()); ++b) {
      const int c = previous[static_cast<std::size_t>(b)];
      if (c >= classes_) throw DataError("history class out of range");
      if (c >= 0) h(c, b) = Scalar(1);
    }
    return h;
  }

  // Logits, classes x batch.
  Matrix<Scalar> forward(const Batch& batch, bool training = false) {
    if (batch.tokens.rows() != window()) throw DataError("batch window does not match the model");
    Matrix<Scalar> x = embedding_.forward(batch.tokens);
    x = body_->forward(x, training);
    check_finite(x, "model body");
    if (use_history_) {
      Matrix<Scalar> joined(head_input_size(), batch.size());
      joined.topRows(feature_size()) = x;
      joined.bottomRows(classes_) = history_matrix(batch.previous, batch.size());
      x = std::move(joined);
    }
    Matrix<Scalar> logits = head_->forward(x, training);
    check_finite(logits, "output layer");
    return logits;
  }

  // Mean cross-entropy of the batch; fills `probabilities` when given.
  Scalar loss(const Batch& batch, Matrix<Scalar>* probabilities = nullptr, bool training = false) {
    const Matrix<Scalar> logits = forward(batch, training);
    return loss_from_logits(logits, batch, probabilities);
  }

  // Zeroes gradients, runs forward and backward, returns the mean loss.
  Scalar forward_backward(const Batch& batch, Matrix<Scalar>* probabilities = nullptr) {
    for (auto* p : parameters()) p->zero_grad();
    Matrix<Scalar> probs;
    const Matrix<Scalar> logits = forward(batch, true);
    const Scalar value = loss_from_logits(logits, batch, &probs);
    Matrix<Scalar> grad = probs;
    const Scalar inv = Scalar(1) / Scalar(batch.size());
    for (Index b = 0; b < batch.size(); ++b) grad(batch.targets[static_cast<std::size_t>(b)], b) -= Scalar(1);
    grad *= inv;
    Matrix<Scalar> g = head_->backward(grad);
    g = body_->backward(g.topRows(feature_size()));
    embedding_.backward(g);
    if (probabilities) *probabilities = std::move(probs);
    return value;
  }

 private:
  Scalar loss_from_logits(const Matrix<Scalar>& logits, const Batch& batch, Matrix<Scalar>* probabilities) const {
    if (static_cast<Index>(batch.targets.size()) != batch.size()) throw DataError("batch has no targets");
    Scalar total = 0;
    Matrix<Scalar> probs(classes_, batch.size());
    for (Index b = 0; b < batch.size(); ++b) {
      auto r = softmax_cross_entropy(logits.col(b), batch.targets[static_cast<std::size_t>(b)]);
      total += r.loss;
      probs.col(b) = r.probabilities;
    }
    if (probabilities) *probabilities = std::move(probs);
    return total / Scalar(batch.size());
  }

  Embedding<Scalar> embedding_;
  LayerPtr<Scalar> body_;
  std::unique_ptr<Dense<Scalar>> head_;
  Index classes_;
  bool use_history_;
};

/// Softmax over each column of a logits matrix.
template <typename Scalar>
Matrix<Scalar> softmax_columns(const Matrix<Scalar>& logits) {
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Index b = 0; b < logits.cols(); ++b) {
    const Scalar shift = logits.col(b).maxCoeff();
    out.col(b) = (logits.col(b).array() - shift).exp().matrix();
    out.col(b) /= out.col(b).sum();
  }
  return out;
}

}  // namespace dact::nn
