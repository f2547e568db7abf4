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
#include <random>
#include <string>
#include <vector>

#include "dact/nn/tensor.hpp"

namespace dact::nn {

// Activations travel as (features x batch) matrices, one sample per column.
template <typename Scalar>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Index input_size() const = 0;
  virtual Index output_size() const = 0;

  virtual Matrix<Scalar> forward(const Matrix<Scalar>& input, bool training) = 0;
  // Accumulates parameter gradients; returns the gradient w.r.t. the last forward input.
  virtual Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) = 0;

  virtual std::vector<Parameter<Scalar>*> parameters() { return {}; }
};

template <typename Scalar>
using LayerPtr = std::unique_ptr<Layer<Scalar>>;

template <typename Scalar>
Matrix<Scalar> glorot_uniform(Index rows, Index cols, Index fan_in, Index fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix<Scalar> m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = static_cast<Scalar>(dist(rng));
  return m;
}

// Square orthogonal matrix from the QR decomposition of a Gaussian draw.
template <typename Scalar>
Matrix<Scalar> orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) g(r, c) = dist(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix signs so the draw is unique given the Gaussian matrix.
  const Eigen::VectorXd d = qr.matrixQR().diagonal();
  for (Index c = 0; c < n; ++c)
    if (d(c) < 0) q.col(c) *= -1.0;
  return q.cast<Scalar>();
}

template <typename Scalar>
class Dense : public Layer<Scalar> {
 public:
  Dense(std::string name, Index in, Index out, std::mt19937_64& rng)
      : weight_(name + ".weight", glorot_uniform<Scalar>(out, in, in, out, rng)),
        bias_(name + ".bias", Matrix<Scalar>::Zero(out, 1)) {}

  std::string kind() const override { return "dense"; }
  Index input_size() const override { return weight_.value.cols(); }
  Index output_size() const override { return weight_.value.rows(); }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool) override {
    input_ = input;
    Matrix<Scalar> out = weight_.value * input;
    out.colwise() += bias_.value.col(0);
    return out;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    weight_.grad.noalias() += grad_output * input_.transpose();
    bias_.grad.col(0) += grad_output.rowwise().sum();
    return weight_.value.transpose() * grad_output;
  }

  std::vector<Parameter<Scalar>*> parameters() override { return {&weight_, &bias_}; }

 private:
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
  Matrix<Scalar> input_;
};

template <typename Scalar>
class Relu : public Layer<Scalar> {
 public:
  explicit Relu(Index size) : size_(size) {}

  std::string kind() const override { return "relu"; }
  Index input_size() const override { return size_; }
  Index output_size() const override { return size_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool) override {
    mask_ = (input.array() > Scalar(0)).template cast<Scalar>();
    return input.cwiseMax(Scalar(0));
  }
  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    return grad_output.cwiseProduct(mask_);
  }

 private:
  Index size_;
  Matrix<Scalar> mask_;
};

// Inverted dropout; identity outside training or when rate == 0.
template <typename Scalar>
class Dropout : public Layer<Scalar> {
 public:
  Dropout(Index size, double rate, std::uint64_t seed) : size_(size), rate_(rate), rng_(seed) {}

  std::string kind() const override { return "dropout"; }
  Index input_size() const override { return size_; }
  Index output_size() const override { return size_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool training) override {
    if (!training || rate_ <= 0.0) {
      mask_.resize(0, 0);
      return input;
    }
    std::bernoulli_distribution keep(1.0 - rate_);
    const Scalar scale = Scalar(1.0 / (1.0 - rate_));
    mask_.resize(input.rows(), input.cols());
    for (Index i = 0; i < mask_.size(); ++i) mask_.data()[i] = keep(rng_) ? scale : Scalar(0);
    return input.cwiseProduct(mask_);
  }
  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    return mask_.size() == 0 ? grad_output : Matrix<Scalar>(grad_output.cwiseProduct(mask_));
  }

 private:
  Index size_;
  double rate_;
  std::mt19937_64 rng_;
  Matrix<Scalar> mask_;
};

// Valid 2-D convolution over channel-first samples, one sample per column.
template <typename Scalar>
class Conv2d : public Layer<Scalar> {
 public:
  Conv2d(std::string name, const ConvShape& shape, std::mt19937_64& rng) : shape_(shape) {
    if (shape.kernel_height > shape.height || shape.kernel_width > shape.width)
      throw DataError("convolution kernel larger than its input");
    const Index fan_in = shape.kernel_size();
    const Index fan_out = shape.count * shape.kernel_height * shape.kernel_width;
    kernels_ = Parameter<Scalar>(name + ".kernels",
                                 glorot_uniform<Scalar>(shape.count, fan_in, fan_in, fan_out, rng));
    bias_ = Parameter<Scalar>(name + ".bias", Matrix<Scalar>::Zero(shape.count, 1));
  }

  std::string kind() const override { return "conv2d"; }
  Index input_size() const override { return shape_.input_size(); }
  Index output_size() const override { return shape_.output_size(); }
  const ConvShape& shape() const { return shape_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool) override {
    input_ = input;
    Matrix<Scalar> out(shape_.output_size(), input.cols());
    const Vector<Scalar> bias = bias_.value.col(0);
    for (Index b = 0; b < input.cols(); ++b)
      detail::conv_forward(shape_, input.col(b).data(), kernels_.value, bias, out.col(b).data());
    return out;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    Matrix<Scalar> grad_input(shape_.input_size(), grad_output.cols());
    Vector<Scalar> grad_bias = Vector<Scalar>::Zero(shape_.count);
    for (Index b = 0; b < grad_output.cols(); ++b) {
      detail::conv_backward(shape_, input_.col(b).data(), kernels_.value, grad_output.col(b).data(),
                            kernels_.grad, grad_bias, grad_input.col(b).data());
    }
    bias_.grad.col(0) += grad_bias;
    return grad_input;
  }

  std::vector<Parameter<Scalar>*> parameters() override { return {&kernels_, &bias_}; }

 private:
  ConvShape shape_;
  Parameter<Scalar> kernels_;
  Parameter<Scalar> bias_;
  Matrix<Scalar> input_;
};

// Max over the time axis of (channels, time, dim) samples -> (channels, dim).
template <typename Scalar>
class MaxOverTime : public Layer<Scalar> {
 public:
  MaxOverTime(Index channels, Index time, Index dim) : channels_(channels), time_(time), dim_(dim) {
    if (time < 1) throw DataError("max-over-time needs at least one time step");
  }

  std::string kind() const override { return "max_over_time"; }
  Index input_size() const override { return channels_ * time_ * dim_; }
  Index output_size() const override { return channels_ * dim_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool) override {
    const Index batch = input.cols();
    argmax_.resize(output_size(), batch);
    Matrix<Scalar> out(output_size(), batch);
    for (Index b = 0; b < batch; ++b) {
      const Scalar* x = input.col(b).data();
      for (Index c = 0; c < channels_; ++c) {
        const Scalar* xc = x + c * time_ * dim_;
        for (Index d = 0; d < dim_; ++d) {
          Index best = 0;
          for (Index t = 1; t < time_; ++t)
            if (xc[t * dim_ + d] > xc[best * dim_ + d]) best = t;
          out(c * dim_ + d, b) = xc[best * dim_ + d];
          argmax_(c * dim_ + d, b) = c * time_ * dim_ + best * dim_ + d;
        }
      }
    }
    return out;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    Matrix<Scalar> grad_input = Matrix<Scalar>::Zero(input_size(), grad_output.cols());
    for (Index b = 0; b < grad_output.cols(); ++b)
      for (Index o = 0; o < output_size(); ++o) grad_input(argmax_(o, b), b) += grad_output(o, b);
    return grad_input;
  }

 private:
  Index channels_, time_, dim_;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> argmax_;
};

template <typename Scalar>
class Sequential : public Layer<Scalar> {
 public:
  Sequential() = default;

  Sequential& add(LayerPtr<Scalar> layer) {
    if (!layers_.empty() && layers_.back()->output_size() != layer->input_size()) {
      throw DataError("layer '" + layer->kind() + "' expects input width " + std::to_string(layer->input_size()) +
                      ", previous layer produces " + std::to_string(layers_.back()->output_size()));
    }
    layers_.push_back(std::move(layer));
    return *this;
  }

  std::string kind() const override { return "sequential"; }
  Index input_size() const override { return layers_.front()->input_size(); }
  Index output_size() const override { return layers_.back()->output_size(); }
  const std::vector<LayerPtr<Scalar>>& layers() const { return layers_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool training) override {
    Matrix<Scalar> x = input;
    for (auto& layer : layers_) {
      x = layer->forward(x, training);
      check_finite(x, layer->kind().c_str());
    }
    return x;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    Matrix<Scalar> g = grad_output;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  std::vector<Parameter<Scalar>*> parameters() override {
    std::vector<Parameter<Scalar>*> out;
    for (auto& layer : layers_)
      for (auto* p : layer->parameters()) out.push_back(p);
    return out;
  }

 private:
  std::vector<LayerPtr<Scalar>> layers_;
};

// Runs every branch on the same input and stacks their outputs.
template <typename Scalar>
class Parallel : public Layer<Scalar> {
 public:
  Parallel& add(LayerPtr<Scalar> branch) {
    if (!branches_.empty() && branch->input_size() != branches_.front()->input_size())
      throw DataError("parallel branches must share the input width");
    branches_.push_back(std::move(branch));
    return *this;
  }

  std::string kind() const override { return "parallel"; }
  Index input_size() const override { return branches_.front()->input_size(); }
  Index output_size() const override {
    Index n = 0;
    for (const auto& b : branches_) n += b->output_size();
    return n;
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool training) override {
    Matrix<Scalar> out(output_size(), input.cols());
    Index row = 0;
    for (auto& b : branches_) {
      out.middleRows(row, b->output_size()) = b->forward(input, training);
      row += b->output_size();
    }
    return out;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    Matrix<Scalar> grad_input = Matrix<Scalar>::Zero(input_size(), grad_output.cols());
    Index row = 0;
    for (auto& b : branches_) {
      grad_input += b->backward(grad_output.middleRows(row, b->output_size()));
      row += b->output_size();
    }
    return grad_input;
  }

  std::vector<Parameter<Scalar>*> parameters() override {
    std::vector<Parameter<Scalar>*> out;
    for (auto& b : branches_)
      for (auto* p : b->parameters()) out.push_back(p);
    return out;
  }

 private:
  std::vector<LayerPtr<Scalar>> branches_;
};

// Lookup table. Input: (window x batch) token indices; output: one row-major
// (window x dim) block per column. Row 0 (PAD) never receives gradient.
template <typename Scalar>
class Embedding {
 public:
  Embedding(Matrix<Scalar> table, bool trainable) : table_("embedding", std::move(table), trainable) {
    table_.frozen_row = kPadIndex;
  }

  Index vocab_size() const { return table_.value.rows(); }
  Index dim() const { return table_.value.cols(); }
  bool trainable() const { return table_.trainable; }
  Parameter<Scalar>& table() { return table_; }
  const Parameter<Scalar>& table() const { return table_; }

  Matrix<Scalar> forward(const Eigen::MatrixXi& tokens) {
    tokens_ = tokens;
    const Index window = tokens.rows(), d = dim();
    Matrix<Scalar> out(window * d, tokens.cols());
    for (Index b = 0; b < tokens.cols(); ++b) {
      for (Index t = 0; t < window; ++t) {
        const int id = tokens(t, b);
        if (id < 0 || id >= vocab_size()) throw DataError("token index out of vocabulary range");
        out.col(b).segment(t * d, d) = table_.value.row(id).transpose();
      }
    }
    return out;
  }

  void backward(const Matrix<Scalar>& grad_output) {
    if (!table_.trainable) return;
    const Index d = dim();
    for (Index b = 0; b < tokens_.cols(); ++b) {
      for (Index t = 0; t < tokens_.rows(); ++t) {
        const int id = tokens_(t, b);
        if (id == kPadIndex) continue;
        table_.grad.row(id) += grad_output.col(b).segment(t * d, d).transpose();
      }
    }
  }

 private:
  Parameter<Scalar> table_;
  Eigen::MatrixXi tokens_;
};

}  // namespace dact::nn
