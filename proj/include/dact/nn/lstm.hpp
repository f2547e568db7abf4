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

#include <string>
#include <utility>
#include <vector>

#include "dact/nn/layers.hpp"

namespace dact::nn {

// One LSTM direction. Gate rows are stacked in the order input, forget, cell, output.
template <typename Scalar>
struct LstmParams {
  Parameter<Scalar> input_weight;      // 4H x input
  Parameter<Scalar> recurrent_weight;  // 4H x H
  Parameter<Scalar> bias;              // 4H x 1

  Index units() const { return recurrent_weight.value.cols(); }
  Index input_size() const { return input_weight.value.cols(); }

  static LstmParams init(const std::string& name, Index input, Index units, std::mt19937_64& rng) {
    LstmParams p;
    p.input_weight = Parameter<Scalar>(name + ".input_weight",
                                       glorot_uniform<Scalar>(4 * units, input, input, 4 * units, rng));
    Matrix<Scalar> rec(4 * units, units);
    for (Index g = 0; g < 4; ++g) rec.middleRows(g * units, units) = orthogonal<Scalar>(units, rng);
    p.recurrent_weight = Parameter<Scalar>(name + ".recurrent_weight", std::move(rec));
    Matrix<Scalar> b = Matrix<Scalar>::Zero(4 * units, 1);
    b.middleRows(units, units).setOnes();
    p.bias = Parameter<Scalar>(name + ".bias", std::move(b));
    return p;
  }

  std::vector<Parameter<Scalar>*> parameters() { return {&input_weight, &recurrent_weight, &bias}; }
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> sigmoid(const Matrix<Scalar>& a) {
  return (Scalar(1) + (-a.array()).exp()).inverse().matrix();
}

// Activations of one batched step, kept for backpropagation.
template <typename Scalar>
struct LstmStep {
  Matrix<Scalar> input, forget, cell_in, output;   // gate activations, H x B
  Matrix<Scalar> c, tanh_c, h;
};

template <typename Scalar>
LstmStep<Scalar> lstm_step(const LstmParams<Scalar>& p, const Matrix<Scalar>& x, const Matrix<Scalar>& h_prev,
                           const Matrix<Scalar>& c_prev) {
  const Index units = p.units();
  Matrix<Scalar> a = p.input_weight.value * x;
  a.noalias() += p.recurrent_weight.value * h_prev;
  a.colwise() += p.bias.value.col(0);
  LstmStep<Scalar> s;
  s.input = sigmoid<Scalar>(a.middleRows(0, units));
  s.forget = sigmoid<Scalar>(a.middleRows(units, units));
  s.cell_in = a.middleRows(2 * units, units).array().tanh().matrix();
  s.output = sigmoid<Scalar>(a.middleRows(3 * units, units));
  s.c = s.forget.cwiseProduct(c_prev) + s.input.cwiseProduct(s.cell_in);
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = s.output.cwiseProduct(s.tanh_c);
  return s;
}

}  // namespace detail

/// Single LSTM step for one sample: returns (h, c).
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> lstm_cell(const Vector<Scalar>& x, const Vector<Scalar>& h_prev,
                                                    const Vector<Scalar>& c_prev, const LstmParams<Scalar>& params) {
  if (x.size() != params.input_size() || h_prev.size() != params.units() || c_prev.size() != params.units())
    throw DataError("lstm_cell dimensions do not match the parameters");
  auto s = detail::lstm_step<Scalar>(params, x, h_prev, c_prev);
  check_finite(s.h, "lstm_cell");
  check_finite(s.c, "lstm_cell");
  return {s.h.col(0), s.c.col(0)};
}

// Bidirectional LSTM over a (time x dim) row-major sample. The output stacks the
// final hidden state of the left-to-right pass and that of the right-to-left pass.
template <typename Scalar>
class BiLstm : public Layer<Scalar> {
 public:
  BiLstm(std::string name, Index time, Index dim, Index units, std::mt19937_64& rng)
      : time_(time), dim_(dim),
        forward_(LstmParams<Scalar>::init(name + ".fwd", dim, units, rng)),
        backward_(LstmParams<Scalar>::init(name + ".bwd", dim, units, rng)) {}

  std::string kind() const override { return "bilstm"; }
  Index input_size() const override { return time_ * dim_; }
  Index output_size() const override { return 2 * units(); }
  Index units() const { return forward_.units(); }

  LstmParams<Scalar>& forward_params() { return forward_; }
  LstmParams<Scalar>& backward_params() { return backward_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& input, bool) override {
    input_ = input;
    Matrix<Scalar> out(output_size(), input.cols());
    out.topRows(units()) = run(forward_, fwd_steps_, false);
    out.bottomRows(units()) = run(backward_, bwd_steps_, true);
    return out;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& grad_output) override {
    Matrix<Scalar> grad_input = Matrix<Scalar>::Zero(input_size(), grad_output.cols());
    backprop(forward_, fwd_steps_, false, grad_output.topRows(units()), grad_input);
    backprop(backward_, bwd_steps_, true, grad_output.bottomRows(units()), grad_input);
    return grad_input;
  }

  std::vector<Parameter<Scalar>*> parameters() override {
    auto out = forward_.parameters();
    for (auto* p : backward_.parameters()) out.push_back(p);
    return out;
  }

 private:
  Index time_at(Index step, bool reversed) const { return reversed ? time_ - 1 - step : step; }

  Matrix<Scalar> run(const LstmParams<Scalar>& p, std::vector<detail::LstmStep<Scalar>>& steps, bool reversed) {
    const Index batch = input_.cols();
    Matrix<Scalar> h = Matrix<Scalar>::Zero(units(), batch);
    Matrix<Scalar> c = Matrix<Scalar>::Zero(units(), batch);
    steps.clear();
    steps.reserve(static_cast<std::size_t>(time_));
    for (Index s = 0; s < time_; ++s) {
      const Matrix<Scalar> x = input_.middleRows(time_at(s, reversed) * dim_, dim_);
      steps.push_back(detail::lstm_step<Scalar>(p, x, h, c));
      h = steps.back().h;
      c = steps.back().c;
    }
    return h;
  }

  void backprop(LstmParams<Scalar>& p, const std::vector<detail::LstmStep<Scalar>>& steps, bool reversed,
                const Matrix<Scalar>& grad_h_final, Matrix<Scalar>& grad_input) {
    const Index n = units();
    const Index batch = grad_h_final.cols();
    Matrix<Scalar> dh = grad_h_final;
    Matrix<Scalar> dc = Matrix<Scalar>::Zero(n, batch);
    Matrix<Scalar> da(4 * n, batch);
    const Matrix<Scalar> zeros = Matrix<Scalar>::Zero(n, batch);
    for (Index s = time_ - 1; s >= 0; --s) {
      const auto& st = steps[static_cast<std::size_t>(s)];
      const Matrix<Scalar>& c_prev = s > 0 ? steps[static_cast<std::size_t>(s - 1)].c : zeros;
      const Matrix<Scalar>& h_prev = s > 0 ? steps[static_cast<std::size_t>(s - 1)].h : zeros;
      dc.array() += dh.array() * st.output.array() * (Scalar(1) - st.tanh_c.array().square());
      da.middleRows(0, n) = (dc.array() * st.cell_in.array() * st.input.array() * (Scalar(1) - st.input.array())).matrix();
      da.middleRows(n, n) = (dc.array() * c_prev.array() * st.forget.array() * (Scalar(1) - st.forget.array())).matrix();
      da.middleRows(2 * n, n) = (dc.array() * st.input.array() * (Scalar(1) - st.cell_in.array().square())).matrix();
      da.middleRows(3 * n, n) = (dh.array() * st.tanh_c.array() * st.output.array() * (Scalar(1) - st.output.array())).matrix();
      const Index t = time_at(s, reversed);
      p.input_weight.grad.noalias() += da * input_.middleRows(t * dim_, dim_).transpose();
      p.recurrent_weight.grad.noalias() += da * h_prev.transpose();
      p.bias.grad.col(0) += da.rowwise().sum();
      grad_input.middleRows(t * dim_, dim_).noalias() += p.input_weight.value.transpose() * da;
      dh.noalias() = p.recurrent_weight.value.transpose() * da;
      dc = dc.cwiseProduct(st.forget);
    }
  }

  Index time_, dim_;
  LstmParams<Scalar> forward_;
  LstmParams<Scalar> backward_;
  Matrix<Scalar> input_;
  std::vector<detail::LstmStep<Scalar>> fwd_steps_, bwd_steps_;
};

}  // namespace dact::nn
