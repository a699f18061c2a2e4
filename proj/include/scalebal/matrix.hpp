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

#ifndef SCALEBAL_MATRIX_HPP_
#define SCALEBAL_MATRIX_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace scalebal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files; also carries the offending line number in the text.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Violated preconditions (dimension mismatch, negative entries, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Overflow / non-finite intermediates.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Exponents beyond this abort evaluations instead of producing infinities.
inline constexpr double kMaxExponent = 700.0;

struct MatrixEntry {
  int index;     // column for a row view, row for a column view
  double value;  // strictly positive
};

struct Triplet {
  int row;
  int col;
  double value;
};

// Square sparse matrix with strictly positive stored entries, kept in both a
// row-compressed and a column-compressed layout. Immutable after
// construction; duplicate triplets are summed and explicit zeros dropped.
class SparseNonnegativeMatrix {
 public:
  SparseNonnegativeMatrix(int dim, std::vector<Triplet> triplets);

  int dim() const { return n_; }
  int nnz() const { return static_cast<int>(row_entries_.size()); }

  std::span<const MatrixEntry> row(int i) const {
    return {row_entries_.data() + row_ptr_[i],
            row_entries_.data() + row_ptr_[i + 1]};
  }
  std::span<const MatrixEntry> col(int j) const {
    return {col_entries_.data() + col_ptr_[j],
            col_entries_.data() + col_ptr_[j + 1]};
  }

  Eigen::VectorXd row_sums() const;
  Eigen::VectorXd col_sums() const;

  // Value at (i, j), 0 if not stored.
  double at(int i, int j) const;

  std::vector<Triplet> triplets() const;

  Eigen::MatrixXd dense() const;

 private:
  int n_ = 0;
  std::vector<int> row_ptr_, col_ptr_;
  std::vector<MatrixEntry> row_entries_, col_entries_;
};

struct MatrixStats {
  double entry_sum = 0;   // s_A
  double min_nonzero = 0; // l_A
  double ratio = 0;       // w_A = s_A / l_A
  int nnz = 0;
};

MatrixStats matrix_stats(const SparseNonnegativeMatrix& a);

// Coordinate-format reader. Accepts an optional "%%MatrixMarket matrix
// coordinate real general" banner, skips % comments, sums duplicates and
// drops explicit zeros. Indices are 1-based in the file.
SparseNonnegativeMatrix load_matrix_market(const std::string& path);
void save_matrix_market(const std::string& path,
                        const SparseNonnegativeMatrix& a);

// M_ij = A_ij * exp(x_i + y_j); same sparsity pattern.
SparseNonnegativeMatrix apply_scaling(const SparseNonnegativeMatrix& a,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y);

// M_ij = A_ij * exp(x_i - x_j); same sparsity pattern.
SparseNonnegativeMatrix apply_balancing(const SparseNonnegativeMatrix& a,
                                        const Eigen::VectorXd& x);

struct SccDecomposition {
  std::vector<int> component_id;            // per vertex
  std::vector<std::vector<int>> components; // topological order w.r.t. edges
  bool is_strongly_connected = false;
};

// Strongly connected components of the directed graph supp(A). Components
// are listed so that every cross-component edge goes from an earlier
// component to a later one.
SccDecomposition scc_decompose(const SparseNonnegativeMatrix& a);

enum class Scalability { kExact, kAlmost, kInfeasible };

// Decides (r,c)-scalability of the pattern supp(A) via the transportation
// problem with supplies r and demands c. Exactness requires a feasible flow
// that is strictly positive on every support edge between rows with r_i > 0
// and columns with c_j > 0.
Scalability check_scalable(const SparseNonnegativeMatrix& a,
                           const Eigen::VectorXd& r, const Eigen::VectorXd& c);

// Log-scale diagonal factors. For balancing only x is set; for scaling both.
struct DiagonalFactors {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // empty for balancing

  // exp(max log factor - min log factor) over all stored factors.
  double kappa() const;
};

}  // namespace scalebal

#endif  // SCALEBAL_MATRIX_HPP_
