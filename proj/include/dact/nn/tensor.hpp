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

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dact/common.hpp"

namespace dact::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Dense row-major n-dimensional array.
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<Index> shape) : shape_(std::move(shape)) {
    data_ = Vector<Scalar>::Zero(product(shape_));
  }
  Tensor(std::vector<Index> shape, Vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != product(shape_)) throw DataError("tensor data does not match its shape");
  }

  const std::vector<Index>& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return data_.size(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  Vector<Scalar>& flat() { return data_; }
  const Vector<Scalar>& flat() const { return data_; }

  Scalar& operator()(Index i, Index j, Index k) { return data_(offset(i, j, k)); }
  Scalar operator()(Index i, Index j, Index k) const { return data_(offset(i, j, k)); }

  bool all_finite() const { return data_.allFinite(); }

 private:
  static Index product(const std::vector<Index>& shape) {
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
  }
  Index offset(Index i, Index j, Index k) const { return (i * shape_[1] + j) * shape_[2] + k; }

  std::vector<Index> shape_;
  Vector<Scalar> data_;
};

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool trainable = true;
  std::optional<Index> frozen_row;   // row whose gradient is always masked

  Parameter() = default;
  Parameter(std::string n, Matrix<Scalar> v, bool train = true)
      : name(std::move(n)), value(std::move(v)), grad(Matrix<Scalar>::Zero(value.rows(), value.cols())),
        trainable(train) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Index size() const { return value.size(); }
};

template <typename Derived>
void check_finite(const Eigen::DenseBase<Derived>& m, const char* where) {
  if (!m.allFinite()) throw NumericError(std::string("non-finite value produced by ") + where);
}

// Convolution geometry for channel-first inputs (channels, height, width).
struct ConvShape {
  Index channels = 1;
  Index height = 0;
  Index width = 0;
  Index count = 1;
  Index kernel_height = 1;
  Index kernel_width = 1;

  Index out_height() const { return height - kernel_height + 1; }
  Index out_width() const { return width - kernel_width + 1; }
  Index input_size() const { return channels * height * width; }
  Index output_size() const { return count * out_height() * out_width(); }
  Index kernel_size() const { return channels * kernel_height * kernel_width; }
};

namespace detail {

// Patch matrix of one sample: row (c, i, j) holds the input under kernel tap
// (c, i, j) for every output position, positions in row-major order.
template <typename Scalar>
RowMatrix<Scalar> im2col(const ConvShape& s, const Scalar* input) {
  using ConstMap = Eigen::Map<const RowMatrix<Scalar>>;
  const Index oh = s.out_height(), ow = s.out_width();
  RowMatrix<Scalar> patches(s.kernel_size(), oh * ow);
  for (Index c = 0; c < s.channels; ++c) {
    ConstMap in(input + c * s.height * s.width, s.height, s.width);
    for (Index i = 0; i < s.kernel_height; ++i)
      for (Index j = 0; j < s.kernel_width; ++j)
        Eigen::Map<RowMatrix<Scalar>>(patches.row((c * s.kernel_height + i) * s.kernel_width + j).data(), oh, ow) =
            in.block(i, j, oh, ow);
  }
  return patches;
}

// Valid cross-correlation of one sample. `kernels` is count x (channels*kh*kw),
// each row laid out (channel, row, column). Every output element is accumulated
// from zero in kernel row-major order, and the bias is added last: one rank-1
// update per tap keeps that order while vectorizing over kernels and positions.
template <typename Scalar>
void conv_forward(const ConvShape& s, const Scalar* input, const Matrix<Scalar>& kernels,
                  const Vector<Scalar>& bias, Scalar* output) {
  const RowMatrix<Scalar> patches = im2col(s, input);
  Matrix<Scalar> acc = Matrix<Scalar>::Zero(s.count, patches.cols());
  for (Index t = 0; t < s.kernel_size(); ++t) acc.noalias() += kernels.col(t) * patches.row(t);
  Eigen::Map<RowMatrix<Scalar>>(output, s.count, patches.cols()) = acc.colwise() + bias;
}

// Accumulates kernel/bias gradients and writes the input gradient of one sample.
template <typename Scalar>
void conv_backward(const ConvShape& s, const Scalar* input, const Matrix<Scalar>& kernels,
                   const Scalar* grad_output, Matrix<Scalar>& grad_kernels, Vector<Scalar>& grad_bias,
                   Scalar* grad_input) {
  const Index oh = s.out_height(), ow = s.out_width();
  const RowMatrix<Scalar> patches = im2col(s, input);
  Eigen::Map<const RowMatrix<Scalar>> gout(grad_output, s.count, oh * ow);
  grad_bias += gout.rowwise().sum();
  grad_kernels.noalias() += gout * patches.transpose();
  const RowMatrix<Scalar> gpatches = kernels.transpose() * gout;
  Eigen::Map<Vector<Scalar>>(grad_input, s.input_size()).setZero();
  for (Index c = 0; c < s.channels; ++c) {
    Eigen::Map<RowMatrix<Scalar>> gin(grad_input + c * s.height * s.width, s.height, s.width);
    for (Index i = 0; i < s.kernel_height; ++i)
      for (Index j = 0; j < s.kernel_width; ++j)
        gin.block(i, j, oh, ow) += Eigen::Map<const RowMatrix<Scalar>>(
            gpatches.row((c * s.kernel_height + i) * s.kernel_width + j).data(), oh, ow);
  }
}

}  // namespace detail

/// Valid (unpadded) 2-D cross-correlation plus per-kernel bias.
/// input: (channels, H, W); kernels: (count, channels, kh, kw); bias: count.
/// Returns (count, H - kh + 1, W - kw + 1).
template <typename Scalar>
Tensor<Scalar> conv2d_valid(const Tensor<Scalar>& input, const Tensor<Scalar>& kernels,
                            const Vector<Scalar>& bias) {
  if (input.rank() != 3 || kernels.rank() != 4) throw DataError("conv2d_valid expects rank-3 input and rank-4 kernels");
  ConvShape s{input.dim(0), input.dim(1), input.dim(2), kernels.dim(0), kernels.dim(2), kernels.dim(3)};
  if (kernels.dim(1) != s.channels) throw DataError("kernel channel count does not match input");
  if (s.kernel_height > s.height || s.kernel_width > s.width) throw DataError("kernel larger than input");
  if (bias.size() != s.count) throw DataError("bias size does not match kernel count");
  const Matrix<Scalar> k = Eigen::Map<const RowMatrix<Scalar>>(kernels.data(), s.count, s.kernel_size());
  Tensor<Scalar> out({s.count, s.out_height(), s.out_width()});
  detail::conv_forward(s, input.data(), k, bias, out.data());
  return out;
}

/// Maximum over the time axis of a (channels, time, dim) tensor -> (channels, dim).
/// Ties resolve to the first time index.
template <typename Scalar>
Tensor<Scalar> max_over_time(const Tensor<Scalar>& input, std::vector<Index>* argmax = nullptr) {
  if (input.rank() != 3 || input.dim(1) < 1) throw DataError("max_over_time expects a (C, T>=1, D) tensor");
  const Index channels = input.dim(0), time = input.dim(1), dim = input.dim(2);
  Tensor<Scalar> out(std::vector<Index>{channels, dim});
  if (argmax) argmax->assign(static_cast<std::size_t>(channels * dim), 0);
  for (Index c = 0; c < channels; ++c) {
    for (Index d = 0; d < dim; ++d) {
      Index best = 0;
      for (Index t = 1; t < time; ++t)
        if (input(c, t, d) > input(c, best, d)) best = t;
      out.flat()(c * dim + d) = input(c, best, d);
      if (argmax) (*argmax)[static_cast<std::size_t>(c * dim + d)] = best;
    }
  }
  return out;
}

template <typename Scalar>
struct SoftmaxLoss {
  Scalar loss;
  Vector<Scalar> probabilities;
};

/// Max-shifted softmax and the negative log-likelihood of `target`.
template <typename Derived>
SoftmaxLoss<typename Derived::Scalar> softmax_cross_entropy(const Eigen::MatrixBase<Derived>& logits,
                                                            Index target) {
  using Scalar = typename Derived::Scalar;
  if (logits.size() < 2) throw DataError("softmax needs at least two classes");
  if (target < 0 || target >= logits.size()) throw DataError("target class out of range");
  check_finite(logits, "softmax input");
  const Scalar shift = logits.maxCoeff();
  Vector<Scalar> shifted = logits.array() - shift;
  const Scalar log_z = std::log(shifted.array().exp().sum());
  Vector<Scalar> probs = (shifted.array() - log_z).exp();
  return {log_z - shifted(target), std::move(probs)};
}

}  // namespace dact::nn
