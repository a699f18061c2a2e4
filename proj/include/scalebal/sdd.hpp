// Copyright 2026 The scalebal Authors
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

#ifndef SCALEBAL_SDD_HPP_
#define SCALEBAL_SDD_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "scalebal/matrix.hpp"

namespace scalebal {

// Symmetric diagonally dominant matrix with nonpositive off-diagonals,
// stored as a diagonal plus nonnegative edge weights (w_ij = -M_ij).
// Immutable after construction.
class SddMatrix {
 public:
  // `edges` hold weights w >= 0 with row < col; duplicates are summed and
  // zero weights dropped. Diagonal dominance is checked to relative 1e-9.
  SddMatrix(Eigen::VectorXd diag, std::vector<Triplet> edges);

  int dim() const { return static_cast<int>(diag_.size()); }
  int offdiag_nnz() const { return 2 * static_cast<int>(weights_.size()); }
  double diag(int i) const { return diag_[i]; }
  const Eigen::VectorXd& diag() const { return diag_; }

  // Neighbors of i with edge weights w_ij = -M_ij >= 0.
  std::span<const MatrixEntry> neighbors(int i) const {
    return {adj_.data() + adj_ptr_[i], adj_.data() + adj_ptr_[i + 1]};
  }

  // diag_i minus the weighted degree of i (the "excess diagonal").
  double slack(int i) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  double quad(const Eigen::VectorXd& x) const;  // x^T M x

  SddMatrix scaled(double s) const;
  SddMatrix submatrix(const std::vector<int>& idx) const;

  Eigen::MatrixXd dense() const;
  Eigen::SparseMatrix<double> sparse() const;

  // Unique edges (row < col) with weights.
  const std::vector<Triplet>& edges() const { return weights_; }

 private:
  Eigen::VectorXd diag_;
  std::vector<Triplet> weights_;  // row < col, value = w >= 0
  std::vector<int> adj_ptr_;
  std::vector<MatrixEntry> adj_;
};

// Exact Schur complement after eliminating the vertices in `f`
// (Sc(M, F) = M_[C,C] - M_[C,F] M_[F,F]^{-1} M_[F,C]), computed by
// sequential pivoting in min-degree order. Result indices follow the order
// of C = complement of F. Throws NumericError on a singular pivot.
SddMatrix schur_complement(const SddMatrix& m, const std::vector<int>& f);

// Sorted complement of f in [0, n).
std::vector<int> complement_of(const std::vector<int>& f, int n);

}  // namespace scalebal

#endif  // SCALEBAL_SDD_HPP_
