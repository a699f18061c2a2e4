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

#ifndef SCALEBAL_NEWTON_HPP_
#define SCALEBAL_NEWTON_HPP_

#include <functional>
#include <limits>

#include <Eigen/Core>

#include "scalebal/objectives.hpp"
#include "scalebal/oracle.hpp"
#include "scalebal/result.hpp"

namespace scalebal {

struct NewtonConfig {
  double k = 0;  // 0: take the oracle's quality per iteration
  long max_iterations = 100000;
  double stagnation_rel = 1e-14;
  // Stop when the problem metric reaches this (negative: no metric rule).
  double metric_target = -1;
  // Test mode: stop when value - f_reference <= gap_target (gap_target >= 0).
  double f_reference = std::numeric_limits<double>::quiet_NaN();
  double gap_target = -1;
  bool keep_iterates = false;  // retain iterates for the R_inf proxy
};

// One box-constrained Newton instance: the evaluator returns the
// Laplacian-form Hessian; `sign` conjugates it back to the true one (empty
// means identity). `metric` is the problem error measured at a point.
struct NewtonProblem {
  std::function<ObjectiveEvaluation(const Eigen::VectorXd&, bool)> eval;
  std::function<double(const Eigen::VectorXd&)> metric;  // may be empty
  Eigen::VectorXd sign;    // +-1 per coordinate; empty = all ones
  bool recenter = false;   // subtract the mean after each step
};

enum class NewtonStop {
  kMetric,      // metric target reached
  kGap,         // test-mode function gap reached
  kStationary,  // zero gradient
  kStagnated,   // relative decrease below threshold
  kIterations,  // iteration cap
};

struct BoxNewtonResult {
  Eigen::VectorXd x;
  double value = 0;
  NewtonStop stop = NewtonStop::kIterations;
  long iterations = 0;
  IterationTrace trace;
};

// The iteration x <- x + (1/k) O((e^2/k^2) H, (1/k) g), with monotone
// acceptance and oracle contract checks. Throws Error on an oracle contract
// violation or a non-decreasing step with a large model value.
BoxNewtonResult box_newton_minimize(const NewtonProblem& problem,
                                    const KOracle& oracle,
                                    Eigen::VectorXd x0,
                                    const NewtonConfig& cfg);

struct SolverConfig {
  NewtonConfig newton;
  double b_start = 1.0;
  double b_cap = 65536.0;
  bool collect_trace = true;
};

// M = D(exp(x)) A D(exp(y)) with scaling_error <= eps. Targets are rescaled
// jointly with A and eps when ||r||_inf or ||c||_inf exceeds 1. Status
// kInfeasible when the pattern admits no (r,c) transportation plan.
DiagonalFactorsResult solve_scaling(const SparseNonnegativeMatrix& a,
                                    const Eigen::VectorXd& r,
                                    const Eigen::VectorXd& c, double eps,
                                    const SolverConfig& cfg = {},
                                    const KOracle* oracle = nullptr);

// Per-SCC balancing with cross-block suppression; balancing_error <= eps on
// balanceable inputs.
DiagonalFactorsResult solve_balancing(const SparseNonnegativeMatrix& a,
                                      double eps, const SolverConfig& cfg = {},
                                      const KOracle* oracle = nullptr);

// Row/column sums of D(exp(x)) A D(exp(x))^{-1} without forming the matrix;
// shared by drivers and tests.
void balancing_sums(const SparseNonnegativeMatrix& a, const Eigen::VectorXd& x,
                    Eigen::VectorXd* rm, Eigen::VectorXd* cm);

// Balances each strongly connected diagonal block with `solver`, then
// spreads the blocks along the topological order so every cross-block entry
// drops below min(eps s_A / n, eps s_ref / (6 (m_cross + 1))). Shared by the
// Newton and IPM drivers.
using BlockBalancer = std::function<DiagonalFactorsResult(
    const SparseNonnegativeMatrix& block, double eps_block)>;
DiagonalFactorsResult balance_per_component(const SparseNonnegativeMatrix& a,
                                            double eps,
                                            const BlockBalancer& solver,
                                            bool collect_trace);

}  // namespace scalebal

#endif  // SCALEBAL_NEWTON_HPP_
