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

#ifndef SCALEBAL_ORACLE_HPP_
#define SCALEBAL_ORACLE_HPP_

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "scalebal/sdd.hpp"

namespace scalebal {

// Largest prefix of vertices (in decreasing relative-slack order, with
// re-checks against already admitted ones) whose principal submatrix is
// alpha-strongly diagonally dominant: M_ii >= (1+alpha) sum_{j in F} |M_ij|.
// Rows with nonpositive diagonal are never admitted.
std::vector<int> find_strong_subset(const SddMatrix& m, double alpha);

// Near-harmonic extension of voltages on C to all vertices, built from the
// averaging scheme: start from the external-degree average over C neighbors,
// then T rounds of averaging over all neighbors (excess diagonal acts as an
// edge to a ground vertex at 0). Linear; transpose application available.
class VoltageExtension {
 public:
  VoltageExtension(std::shared_ptr<const SddMatrix> m, std::vector<int> f,
                   double eps, double alpha);

  // x_hat lives on C (in increasing vertex order); result on all vertices.
  Eigen::VectorXd apply(const Eigen::VectorXd& x_hat) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;

  int iterations() const { return iterations_; }
  const std::vector<int>& f() const { return f_; }
  const std::vector<int>& c() const { return c_; }

 private:
  std::shared_ptr<const SddMatrix> m_;
  std::vector<int> f_, c_;
  std::vector<bool> in_f_;
  Eigen::VectorXd external_degree_;  // over f_, aligned with f_
  int iterations_ = 1;
};

VoltageExtension approx_mapping(std::shared_ptr<const SddMatrix> m,
                                std::vector<int> f, double eps, double alpha);

// Proximal gradient on the D^{-1/2}-rescaled quadratic. Returns x with
// ||x||_inf <= 2 and 1/2 x'Mx + <x,b> <= (1-eps) min over the box of radius
// 2. Requires an alpha-SDD input with alpha >= 4.
Eigen::VectorXd fast_solve(const SddMatrix& m, const Eigen::VectorXd& b,
                           double eps);

// Exact minimizer of 1/2 m x^2 + b x over [-1, 1]; ties prefer the smaller
// magnitude candidate.
double trivial_solve(double m, double b);

struct ChainLevel {
  std::shared_ptr<const SddMatrix> matrix;
  std::vector<int> f;       // eliminated set; empty on the final level
  double eps = 0;           // eps_i of this elimination step
  double alpha = 4;
  std::shared_ptr<const VoltageExtension> mapping;  // null on final level
  std::shared_ptr<const SddMatrix> f_block;         // matrix[f, f]
};

// Vertex sparsifier chain: levels[0] approximates the target matrix within
// eps0, each next level approximates the Schur complement of the previous
// one's F set (here: equals it exactly), and the last level has size 1.
struct SparsifierChain {
  std::vector<ChainLevel> levels;
  double eps0 = 0;
  double delta = 0;

  int depth() const { return static_cast<int>(levels.size()); }
  double quality() const { return 1.0 + 2.0 * depth(); }  // oracle k
};

struct ChainOptions {
  double delta = 0.1;
  double alpha = 4.0;
};

SparsifierChain build_chain(const SddMatrix& m, double delta,
                            double alpha = 4.0);

struct OracleResult {
  Eigen::VectorXd z;
  double value = 0;  // 1/2 z'Az + b'z for the matrix the call was made on
  double k = 0;
  int depth = 0;
};

// Runs the downward/upward pass over the chain; satisfies the k-oracle
// contract with k = 1 + 2d for quad_scale * (chain target matrix).
// eps0_override, when nonnegative, replaces chain.eps0 (used with reused
// chains whose anchor differs from the current matrix by that ratio).
OracleResult optimize_chain(const SparsifierChain& chain,
                            const Eigen::VectorXd& b, double quad_scale = 1.0,
                            double eps0_override = -1.0);

// A k-oracle: solve() returns z with ||z||_inf <= k and
// 1/2 z'Az + b'z <= 1/2 min_{||z||_inf <= 1} (1/2 z'Az + b'z).
class KOracle {
 public:
  virtual ~KOracle() = default;
  virtual OracleResult solve(const SddMatrix& a,
                             const Eigen::VectorXd& b) const = 0;
  // The k a solve on this matrix will report.
  virtual double quality(const SddMatrix& a) const = 0;
  // Oracle call on ((e^2/k^2) H, g/k); the Newton step is then z/k. The
  // returned value refers to that scaled pair.
  virtual OracleResult newton_subproblem(const SddMatrix& hessian,
                                         const Eigen::VectorXd& grad,
                                         double k_override = 0) const;
  // Drop any internal reuse state (e.g. after a rejected Newton step).
  virtual void refresh() const {}
};

// The O(log n)-oracle. Chains are cached and reused while the current
// matrix stays entrywise (weights and relative slacks) within e^{+-eps0} of
// the chain's anchor, which bounds the quadratic-form ratio by the same
// factor; the measured ratio is passed to optimize_chain as eps0.
class ChainOracle : public KOracle {
 public:
  explicit ChainOracle(ChainOptions options = {});

  OracleResult solve(const SddMatrix& a,
                     const Eigen::VectorXd& b) const override;
  double quality(const SddMatrix& a) const override;
  OracleResult newton_subproblem(const SddMatrix& hessian,
                                 const Eigen::VectorXd& grad,
                                 double k_override = 0) const override;
  void refresh() const override;

  long chains_built() const { return chains_built_; }

 private:
  struct Reuse {
    std::shared_ptr<const SparsifierChain> chain;
    std::vector<Triplet> anchor_edges;
    Eigen::VectorXd anchor_diag;
    Eigen::VectorXd anchor_slack;
  };
  // Returns the chain for `a` and the eps0 to account for the reuse gap.
  std::pair<std::shared_ptr<const SparsifierChain>, double> chain_for(
      const SddMatrix& a) const;

  ChainOptions options_;
  mutable Reuse reuse_;
  mutable long chains_built_ = 0;
};

}  // namespace scalebal

#endif  // SCALEBAL_ORACLE_HPP_
