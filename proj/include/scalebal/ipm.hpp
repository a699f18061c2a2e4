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

#ifndef SCALEBAL_IPM_HPP_
#define SCALEBAL_IPM_HPP_

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "scalebal/matrix.hpp"
#include "scalebal/result.hpp"
#include "scalebal/sdd.hpp"

namespace scalebal {

// min <1, t> - <d, x>  over  A_ij e^{x_i - x_j} <= t_ij <= 3U, |x_i| <= B_x
// with U = s_A + ||d||_1 B_x. Variables are ordered (t_1..t_m, x_1..x_n),
// edges in row-major support order.
struct ConeProgram {
  explicit ConeProgram(SparseNonnegativeMatrix a_in) : a(std::move(a_in)) {}

  SparseNonnegativeMatrix a;
  Eigen::VectorXd d;
  double b_x = 1;
  double u = 0;

  struct Edge {
    int i, j;
    double log_a;
  };
  std::vector<Edge> edges;

  int m() const { return static_cast<int>(edges.size()); }
  int n() const { return a.dim(); }
  double objective(const Eigen::VectorXd& t, const Eigen::VectorXd& x) const {
    return t.sum() - d.dot(x);
  }
  // Barrier term count: 2 per edge cone term, 1 per t cap, 2 per x box.
  double nu() const { return 3.0 * m() + 2.0 * n(); }
};

ConeProgram build_cone_program(const SparseNonnegativeMatrix& a,
                               const Eigen::VectorXd& d, double b_x);

// H(xi) = U S U^T with U unit lower triangular (t block first) and S the
// t diagonal plus an SDD x block. Per edge, alpha = 1/g^2 with
// g = ln t - (ln A_ij + x_i - x_j), and the t pivot is
// (alpha + sqrt(alpha) + 1)/t^2 + 1/(3U - t)^2.
struct HessianFactorization {
  int m = 0, n = 0;
  Eigen::VectorXd t_pivot;    // H_tt, per edge
  Eigen::VectorXd coupling;   // alpha_e / t_e, per edge (0 for self-loops)
  std::vector<std::pair<int, int>> edge_xs;  // (i, j) per edge
  std::optional<SddMatrix> s_xx;

  // Dense U and S for verification.
  Eigen::MatrixXd dense_u() const;
  Eigen::MatrixXd dense_s() const;
};

HessianFactorization hessian_factorize(const ConeProgram& prog,
                                       const Eigen::VectorXd& t,
                                       const Eigen::VectorXd& x);

// y ~= H^{-1} rhs with ||y - H^{-1}rhs||_H <= eps ||H^{-1}rhs||_H.
// Triangular solves are exact; the S block uses a dense factorization below
// 400 variables and Jacobi-preconditioned CG above.
Eigen::VectorXd hessian_solve(const HessianFactorization& fact,
                              const Eigen::VectorXd& rhs, double eps);

struct BarrierEvaluation {
  double value = 0;          // f_mu
  double barrier = 0;        // xi alone
  Eigen::VectorXd gradient;  // of f_mu
  std::optional<HessianFactorization> factorization;
};

// f_mu(t, x) = mu (<1,t> - <d,x>) + xi(t,x). Throws InvalidInputError on a
// boundary or exterior point.
BarrierEvaluation barrier_eval(const ConeProgram& prog,
                               const Eigen::VectorXd& t,
                               const Eigen::VectorXd& x, double mu,
                               bool want_hessian);

struct IpmOptions {
  long max_newton_steps = 100000;
  long max_centering_steps = 500;
  double solve_eps = 0.1;        // inexact Newton solve accuracy (<= 0.1)
  bool check_decrements = false; // re-verify decrement <= 1/6 after full steps
  // Early stop when this metric on x reaches the target (negative: unused).
  std::function<double(const Eigen::VectorXd&)> metric;
  double metric_target = -1;
  bool aggressive_schedule = false;  // larger mu growth, no theory backing
};

struct IpmPathResult {
  Eigen::VectorXd t, x;
  double objective = 0;
  long newton_steps = 0;
  bool metric_reached = false;
  long decrement_violations = 0;
  IterationTrace trace;
};

// Short-step path following from t = 2U, x = 0: center, then grow mu by
// (1 + 1/(8 sqrt(nu))) until nu/mu <= eps_obj/2.
IpmPathResult ipm_path_follow(const ConeProgram& prog, double eps_obj,
                              const IpmOptions& opts = {});

struct IpmSolverConfig {
  double b_start = 1.0;
  double b_cap = 65536.0;
  bool collect_trace = true;
  IpmOptions ipm;
};

DiagonalFactorsResult ipm_balance(const SparseNonnegativeMatrix& a, double eps,
                                  const IpmSolverConfig& cfg = {});

DiagonalFactorsResult ipm_scale(const SparseNonnegativeMatrix& a,
                                const Eigen::VectorXd& r,
                                const Eigen::VectorXd& c, double eps,
                                const IpmSolverConfig& cfg = {});

}  // namespace scalebal

#endif  // SCALEBAL_IPM_HPP_
