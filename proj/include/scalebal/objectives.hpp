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

#ifndef SCALEBAL_OBJECTIVES_HPP_
#define SCALEBAL_OBJECTIVES_HPP_

#include <optional>

#include <Eigen/Core>

#include "scalebal/matrix.hpp"
#include "scalebal/sdd.hpp"

namespace scalebal {

struct ObjectiveEvaluation {
  double value = 0;
  Eigen::VectorXd gradient;
  // Laplacian-form Hessian: for the scaling objective this is the matrix
  // after negating the y block (conjugation by diag(I, -I)), which makes the
  // off-diagonals nonpositive. Present only when requested.
  std::optional<SddMatrix> hessian;
};

// f(x, y) = sum_ij A_ij e^{x_i + y_j} - <r, x> - <c, y>
//           (+ lambda * sum_i (e^{x_i} + e^{-x_i}) + sum_j (e^{y_j} + e^{-y_j}))
//
// The variables follow M = D(exp(x)) A D(exp(y)); the gradient is
// (r_M - r, c_M - c) plus regularizer terms.
struct ScalingObjective {
  ScalingObjective(SparseNonnegativeMatrix a, Eigen::VectorXd r,
                   Eigen::VectorXd c);

  SparseNonnegativeMatrix a;
  Eigen::VectorXd r, c;
  double lambda = 0;   // regularization weight, 0 = unregularized
  double box_guess = 1;  // B, meaningful only when lambda > 0
};

// f(x) = sum_ij A_ij e^{x_i - x_j} (+ lambda * sum_i (e^{x_i} + e^{-x_i}))
struct BalancingObjective {
  explicit BalancingObjective(SparseNonnegativeMatrix a);

  SparseNonnegativeMatrix a;
  double lambda = 0;
  double box_guess = 1;
};

ObjectiveEvaluation scaling_eval(const ScalingObjective& obj,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y, bool want_hessian);

ObjectiveEvaluation balancing_eval(const BalancingObjective& obj,
                                   const Eigen::VectorXd& x,
                                   bool want_hessian);

// lambda = eps^2 / (36 n^2 e^B); carries the premise "a B-bounded
// eps-approximate minimizer exists" into a bounded level set.
ScalingObjective regularize_scaling(const ScalingObjective& obj, double eps,
                                    double b);

// lambda = eps^2 l_A / (48 n e^B)
BalancingObjective regularize_balancing(const BalancingObjective& obj,
                                        double eps, double b);

// ||r_M - r||_2^2 + ||c_M - c||_2^2
double scaling_error(const SparseNonnegativeMatrix& m, const Eigen::VectorXd& r,
                     const Eigen::VectorXd& c);

// ||r_M - c_M||_2 / s_M
double balancing_error(const SparseNonnegativeMatrix& m);

// Directed weighted graph together with a demand vector summing to zero.
struct FlowObjective {
  FlowObjective(SparseNonnegativeMatrix graph, Eigen::VectorXd demand);

  SparseNonnegativeMatrix graph;
  Eigen::VectorXd demand;
};

// L(x)_v = sum_{(v,u)} w_vu e^{x_v - x_u} - sum_{(u,v)} w_uv e^{x_u - x_v};
// equals the gradient of sum_ij A_ij e^{x_i - x_j} - <d, x> plus d.
Eigen::VectorXd flow_operator_apply(const FlowObjective& obj,
                                    const Eigen::VectorXd& x);

}  // namespace scalebal

#endif  // SCALEBAL_OBJECTIVES_HPP_
