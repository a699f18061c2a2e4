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

#ifndef SCALEBAL_BASELINES_HPP_
#define SCALEBAL_BASELINES_HPP_

#include <Eigen/Core>

#include "scalebal/matrix.hpp"
#include "scalebal/oracle.hpp"
#include "scalebal/result.hpp"

namespace scalebal {

struct BaselineConfig {
  int max_sweeps = 100000;
  double target_error = 1e-6;
  enum class Order { kCyclic, kGreedy } order = Order::kCyclic;
};

// RAS / Sinkhorn-Knopp in log space: alternate x += ln(r / r_M) and
// y += ln(c / c_M). Requires strictly positive targets and nonzero row and
// column sums on the support.
DiagonalFactorsResult sinkhorn(const SparseNonnegativeMatrix& a,
                               const Eigen::VectorXd& r,
                               const Eigen::VectorXd& c,
                               const BaselineConfig& cfg);

// Osborne's balancing iteration: coordinate updates
// x_i += 0.5 ln(c_i / r_i) with off-diagonal row/column sums, each being the
// exact coordinate minimizer of f. Requires a strongly connected matrix.
DiagonalFactorsResult osborne(const SparseNonnegativeMatrix& a,
                              const BaselineConfig& cfg);

struct BoxQpSolution {
  Eigen::VectorXd z;
  double value = 0;
};

// Exact minimizer of 1/2 z'Mz + b'z over ||z||_inf <= box by enumerating the
// 3^n active-constraint sign patterns. Test oracle; n <= 12.
BoxQpSolution brute_force_oracle(const SddMatrix& m, const Eigen::VectorXd& b,
                                 double box);

// Exact 1-oracle backed by brute_force_oracle (for tests on small n).
class BruteForceKOracle : public KOracle {
 public:
  OracleResult solve(const SddMatrix& a,
                     const Eigen::VectorXd& b) const override;
  double quality(const SddMatrix&) const override { return 1.0; }
};

}  // namespace scalebal

#endif  // SCALEBAL_BASELINES_HPP_
