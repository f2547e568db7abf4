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
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dact/common.hpp"
#include "dact/embeddings.hpp"

namespace dact {

// Pairs of (source token, pivot token) used to fit the source -> pivot map.
struct BilingualLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;
};

/// Two tab-separated tokens per line. With `swap`, the columns are read as (pivot, source).
BilingualLexicon load_lexicon(const std::filesystem::path& path, bool swap = false);
void save_lexicon(const BilingualLexicon& lexicon, const std::filesystem::path& path);

template <typename Scalar>
struct CcaModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector mean_src;
  Vector mean_piv;
  Matrix w_src;           // dim x d canonical directions of the source space
  Matrix w_piv;           // dim x d canonical directions of the pivot space
  Vector correlations;    // d, descending, in [0, 1]
  Matrix transform;       // dim x dim, applied to centred row vectors
  Scalar ridge = Scalar(0);

  Eigen::Index dim() const { return mean_src.size(); }
};

namespace detail {

template <typename Matrix>
Matrix inverse_sqrt_spd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed in CCA whitening");
  auto values = eig.eigenvalues();
  if ((values.array() <= 0).any()) throw NumericError("covariance is not positive definite; increase ridge");
  return eig.eigenvectors() * values.array().rsqrt().matrix().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace detail

/// Canonical correlation analysis between paired rows of `x` (source) and `y` (pivot).
///
/// Both sides are centred, their covariances regularized with `ridge` on the diagonal
/// and whitened by symmetric inverse square roots. The SVD of the whitened cross
/// covariance gives the canonical directions and correlations. The source -> pivot
/// transform maps centred source rows through the source directions and back out of
/// the pivot directions with a pseudo-inverse.
///
/// When `ridge` is empty it defaults to 1e-8 * trace(Sxx + Syy) / (2 * dim).
/// `directions` truncates the number of retained canonical pairs (0 = full rank).
template <typename DerivedX, typename DerivedY>
CcaModel<typename DerivedX::Scalar> fit_cca(const Eigen::MatrixBase<DerivedX>& x_in,
                                            const Eigen::MatrixBase<DerivedY>& y_in,
                                            std::optional<typename DerivedX::Scalar> ridge = std::nullopt,
                                            Eigen::Index directions = 0) {
  using Scalar = typename DerivedX::Scalar;
  using Model = CcaModel<Scalar>;
  using Matrix = typename Model::Matrix;

  const Eigen::Index n = x_in.rows();
  const Eigen::Index dim = x_in.cols();
  if (y_in.rows() != n || y_in.cols() != dim) throw DataError("CCA inputs must have matching shapes");
  // Evaluate once: nullary expressions such as Random() differ between evaluations.
  const Matrix x = x_in, y = y_in;
  if (n < 2) throw DataError("CCA needs at least two paired rows");
  if (!x.allFinite() || !y.allFinite()) throw DataError("CCA input contains non-finite values");
  if (ridge && !(*ridge > Scalar(0))) throw DataError("CCA ridge must be positive");

  Model model;
  model.mean_src = x.colwise().mean().transpose();
  model.mean_piv = y.colwise().mean().transpose();
  const Matrix xc = x.rowwise() - model.mean_src.transpose();
  const Matrix yc = y.rowwise() - model.mean_piv.transpose();
  const Scalar norm = Scalar(1) / Scalar(n - 1);
  Matrix sxx = norm * (xc.transpose() * xc);
  Matrix syy = norm * (yc.transpose() * yc);
  const Matrix sxy = norm * (xc.transpose() * yc);

  model.ridge = ridge ? *ridge : Scalar(1e-8) * (sxx.trace() + syy.trace()) / Scalar(2 * dim);
  if (!(model.ridge > Scalar(0))) throw DataError("CCA inputs are constant; covariance is zero");
  sxx.diagonal().array() += model.ridge;
  syy.diagonal().array() += model.ridge;

  const Matrix wx = detail::inverse_sqrt_spd(sxx);
  const Matrix wy = detail::inverse_sqrt_spd(syy);
  const Matrix whitened = wx * sxy * wy;
  Eigen::JacobiSVD<Matrix> svd(whitened, Eigen::ComputeFullU | Eigen::ComputeFullV);

  const Eigen::Index d = directions > 0 ? std::min(directions, dim) : dim;
  model.correlations = svd.singularValues().head(d).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  model.w_src = wx * svd.matrixU().leftCols(d);
  model.w_piv = wy * svd.matrixV().leftCols(d);

  // Canonical sign: the largest-magnitude entry of each source direction is positive.
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::Index arg = 0;
    model.w_src.col(k).cwiseAbs().maxCoeff(&arg);
    if (model.w_src(arg, k) < Scalar(0)) {
      model.w_src.col(k) *= Scalar(-1);
      model.w_piv.col(k) *= Scalar(-1);
    }
  }

  model.transform = model.w_src * model.w_piv.completeOrthogonalDecomposition().pseudoInverse();
  if (!model.transform.allFinite()) throw NumericError("CCA transform is not finite");
  return model;
}

/// (v - mean_src) * T + mean_piv for a single vector.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project(const CcaModel<Scalar>& model,
                                                  const Eigen::MatrixBase<Derived>& v) {
  if (v.size() != model.dim()) {
    throw DataError("projection input has dimension " + std::to_string(v.size()) + ", expected " +
                    std::to_string(model.dim()));
  }
  return model.transform.transpose() * (v - model.mean_src) + model.mean_piv;
}

/// Row-wise projection of a matrix of source vectors.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> project_rows(const CcaModel<Scalar>& model,
                                                                    const Eigen::MatrixBase<Derived>& rows) {
  if (rows.cols() != model.dim()) throw DataError("projection input has the wrong dimension");
  return ((rows.rowwise() - model.mean_src.transpose()) * model.transform).rowwise() +
         model.mean_piv.transpose();
}

/// Projects every non-PAD row; the result is always static.
inline EmbeddingMatrix project_corpus(const CcaModel<double>& model, const EmbeddingMatrix& matrix) {
  if (matrix.dim() != model.dim()) throw DataError("embedding dimension does not match the CCA model");
  EmbeddingMatrix out;
  out.mode = EmbeddingMode::kStatic;
  out.matrix = Eigen::MatrixXd::Zero(matrix.rows(), matrix.dim());
  if (matrix.rows() > 1) {
    out.matrix.bottomRows(matrix.rows() - 1) = project_rows(model, matrix.matrix.bottomRows(matrix.rows() - 1));
  }
  return out;
}

struct LexiconMatrices {
  Eigen::MatrixXd source;
  Eigen::MatrixXd pivot;
  std::size_t dropped = 0;   // pairs with a member lacking a vector
};

/// Stacks the vectors of usable lexicon pairs row by row.
LexiconMatrices lexicon_matrices(const BilingualLexicon& lexicon, const VectorMap& source,
                                 const VectorMap& pivot);

void save_cca(const CcaModel<double>& model, const std::filesystem::path& path);
CcaModel<double> load_cca(const std::filesystem::path& path);

}  // namespace dact
