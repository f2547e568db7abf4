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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dact/nn/graph.hpp"

namespace dact::nn {

struct GradcheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index checked = 0;
  Index kinks = 0;   // entries skipped because x +- h straddles a ReLU or max switch
};

// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true gradient is
// near zero from turning roundoff into a large relative error: with a loss near 1
// and h = 1e-5 the central difference carries about 1e-11 of cancellation noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares backpropagated gradients against central differences on a random
/// subsample of `per_parameter` entries of every trainable parameter.
///
/// ReLU and max pooling are piecewise linear, so an occasional entry sits within
/// h of a switch and its central difference averages two different slopes. Such
/// entries are detected by disagreeing one-sided differences (beyond what
/// curvature explains) and counted in `kinks` instead of being scored.
template <typename Scalar>
GradcheckReport gradcheck_report(LayerGraph<Scalar>& graph, const Batch& batch, std::uint64_t seed = 7,
                                 Index per_parameter = 200, double step = 1e-5, double kink_tolerance = 2e-4) {
  graph.forward_backward(batch);
  const double base = graph.loss(batch);
  std::mt19937_64 rng(seed);
  GradcheckReport report;
  for (auto* p : graph.trainable_parameters()) {
    const Matrix<Scalar> analytic = p->grad;
    std::vector<Index> candidates;
    for (Index i = 0; i < p->value.size(); ++i) {
      if (p->frozen_row && i % p->value.rows() == *p->frozen_row) continue;
      candidates.push_back(i);
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    if (static_cast<Index>(candidates.size()) > per_parameter) candidates.resize(static_cast<std::size_t>(per_parameter));
    for (Index i : candidates) {
      Scalar& entry = p->value.data()[i];
      const Scalar saved = entry;
      entry = saved + Scalar(step);
      const double up = graph.loss(batch);
      entry = saved - Scalar(step);
      const double down = graph.loss(batch);
      entry = saved;
      const double forward = (up - base) / step, backward = (base - down) / step;
      if (std::abs(forward - backward) > kink_tolerance * std::max({std::abs(forward), std::abs(backward), 1e-3})) {
        ++report.kinks;
        continue;
      }
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(static_cast<double>(analytic.data()[i]), numeric);
      ++report.checked;
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_parameter = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

template <typename Scalar>
double gradcheck(LayerGraph<Scalar>& graph, const Batch& batch, std::uint64_t seed = 7) {
  return gradcheck_report(graph, batch, seed).max_relative_error;
}

}  // namespace dact::nn
