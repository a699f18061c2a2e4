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

#include "scalebal/objectives.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace scalebal {

namespace {

void check_exponent(double expo, int i, int j) {
  if (!(std::abs(expo) <= kMaxExponent)) {
    throw NumericError("entry (" + std::to_string(i + 1) + ", " +
                       std::to_string(j + 1) + ") reaches log magnitude " +
                       std::to_string(expo) + "; evaluation aborted");
  }
}

void check_factor_exponent(const Eigen::VectorXd& v) {
  const double m = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (!(m <= kMaxExponent))
    throw NumericError("regularizer exponent " + std::to_string(m) +
                       " beyond the overflow guard");
}

}  // namespace

ScalingObjective::ScalingObjective(SparseNonnegativeMatrix a_in,
                                   Eigen::VectorXd r_in, Eigen::VectorXd c_in)
    : a(std::move(a_in)), r(std::move(r_in)), c(std::move(c_in)) {
  if (r.size() != a.dim() || c.size() != a.dim())
    throw InvalidInputError("target length does not match matrix dimension");
  if (r.minCoeff() < 0 || c.minCoeff() < 0)
    throw InvalidInputError("targets must be nonnegative");
  const double sum = r.sum();
  if (std::abs(sum - c.sum()) > 1e-12 * std::max(1.0, sum))
    throw InvalidInputError("sum of row targets differs from column targets");
  if (r.maxCoeff() > 1 + 1e-12 || c.maxCoeff() > 1 + 1e-12)
    throw InvalidInputError(
        "targets exceed 1; rescale A, r, c and eps jointly first");
}

BalancingObjective::BalancingObjective(SparseNonnegativeMatrix a_in)
    : a(std::move(a_in)) {}

ObjectiveEvaluation scaling_eval(const ScalingObjective& obj,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y, bool want_hessian) {
  const int n = obj.a.dim();
  if (x.size() != n || y.size() != n)
    throw InvalidInputError("point length does not match objective");
  ObjectiveEvaluation out;
  Eigen::VectorXd rm = Eigen::VectorXd::Zero(n), cm = Eigen::VectorXd::Zero(n);
  std::vector<Triplet> scaled;
  if (want_hessian) scaled.reserve(obj.a.nnz());
  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (const MatrixEntry& e : obj.a.row(i)) {
      const double expo = std::log(e.value) + x[i] + y[e.index];
      check_exponent(expo, i, e.index);
      const double m = std::exp(expo);
      total += m;
      rm[i] += m;
      cm[e.index] += m;
      if (want_hessian) scaled.push_back({i, e.index, m});
    }
  }
  out.value = total - obj.r.dot(x) - obj.c.dot(y);
  out.gradient.resize(2 * n);
  out.gradient.head(n) = rm - obj.r;
  out.gradient.tail(n) = cm - obj.c;

  Eigen::VectorXd reg_diag;
  if (obj.lambda > 0) {
    check_factor_exponent(x);
    check_factor_exponent(y);
    const Eigen::VectorXd ex = x.array().exp(), emx = (-x).array().exp();
    const Eigen::VectorXd ey = y.array().exp(), emy = (-y).array().exp();
    out.value += obj.lambda * ((ex + emx).sum() + (ey + emy).sum());
    out.gradient.head(n) += obj.lambda * (ex - emx);
    out.gradient.tail(n) += obj.lambda * (ey - emy);
    if (want_hessian) {
      reg_diag.resize(2 * n);
      reg_diag.head(n) = obj.lambda * (ex + emx);
      reg_diag.tail(n) = obj.lambda * (ey + emy);
    }
  }

  if (want_hessian) {
    // Laplacian form on the bipartite graph (rows; columns): the y block is
    // negated, so edge (i, n+j) carries weight M_ij.
    Eigen::VectorXd diag(2 * n);
    diag.head(n) = rm;
    diag.tail(n) = cm;
    if (reg_diag.size()) diag += reg_diag;
    std::vector<Triplet> edges;
    edges.reserve(scaled.size());
    for (const Triplet& t : scaled) edges.push_back({t.row, n + t.col, t.value});
    out.hessian.emplace(std::move(diag), std::move(edges));
  }
  return out;
}

ObjectiveEvaluation balancing_eval(const BalancingObjective& obj,
                                   const Eigen::VectorXd& x,
                                   bool want_hessian) {
  const int n = obj.a.dim();
  if (x.size() != n)
    throw InvalidInputError("point length does not match objective");
  ObjectiveEvaluation out;
  Eigen::VectorXd rm = Eigen::VectorXd::Zero(n), cm = Eigen::VectorXd::Zero(n);
  std::vector<Triplet> offdiag;
  if (want_hessian) offdiag.reserve(obj.a.nnz());
  double total = 0;
  double diag_entries = 0;
  Eigen::VectorXd self = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (const MatrixEntry& e : obj.a.row(i)) {
      const double expo = std::log(e.value) + x[i] - x[e.index];
      check_exponent(expo, i, e.index);
      const double m = std::exp(expo);
      total += m;
      rm[i] += m;
      cm[e.index] += m;
      if (i == e.index) {
        self[i] = m;
        diag_entries += m;
      } else if (want_hessian) {
        offdiag.push_back({std::min(i, e.index), std::max(i, e.index), m});
      }
    }
  }
  out.value = total;
  out.gradient = rm - cm;

  Eigen::VectorXd reg_diag;
  if (obj.lambda > 0) {
    check_factor_exponent(x);
    const Eigen::VectorXd ex = x.array().exp(), emx = (-x).array().exp();
    out.value += obj.lambda * (ex + emx).sum();
    out.gradient += obj.lambda * (ex - emx);
    if (want_hessian) reg_diag = obj.lambda * (ex + emx);
  }

  if (want_hessian) {
    // D(r_M + c_M) - (M + M^T); self-loops cancel out of the diagonal.
    Eigen::VectorXd diag = rm + cm - 2 * self;
    if (reg_diag.size()) diag += reg_diag;
    out.hessian.emplace(std::move(diag), std::move(offdiag));
  }
  return out;
}

ScalingObjective regularize_scaling(const ScalingObjective& obj, double eps,
                                    double b) {
  if (!(eps > 0 && eps <= 1)) throw InvalidInputError("eps must be in (0, 1]");
  if (!(b > 0)) throw InvalidInputError("B must be positive");
  ScalingObjective reg = obj;
  const double n = obj.a.dim();
  reg.lambda = eps * eps * std::exp(-b) / (36.0 * n * n);
  reg.box_guess = b;
  return reg;
}

BalancingObjective regularize_balancing(const BalancingObjective& obj,
                                        double eps, double b) {
  if (!(eps > 0 && eps <= 1)) throw InvalidInputError("eps must be in (0, 1]");
  if (!(b > 0)) throw InvalidInputError("B must be positive");
  BalancingObjective reg = obj;
  const double n = obj.a.dim();
  const double l = matrix_stats(obj.a).min_nonzero;
  reg.lambda = eps * eps * l * std::exp(-b) / (48.0 * n);
  reg.box_guess = b;
  return reg;
}

double scaling_error(const SparseNonnegativeMatrix& m, const Eigen::VectorXd& r,
                     const Eigen::VectorXd& c) {
  if (r.size() != m.dim() || c.size() != m.dim())
    throw InvalidInputError("target length does not match matrix dimension");
  return (m.row_sums() - r).squaredNorm() + (m.col_sums() - c).squaredNorm();
}

double balancing_error(const SparseNonnegativeMatrix& m) {
  if (m.nnz() == 0) throw InvalidInputError("matrix has no entries");
  const Eigen::VectorXd r = m.row_sums(), c = m.col_sums();
  return (r - c).norm() / r.sum();
}

FlowObjective::FlowObjective(SparseNonnegativeMatrix graph_in,
                             Eigen::VectorXd demand_in)
    : graph(std::move(graph_in)), demand(std::move(demand_in)) {
  if (demand.size() != graph.dim())
    throw InvalidInputError("demand length does not match graph");
  const double scale = std::max(1.0, demand.cwiseAbs().sum());
  if (std::abs(demand.sum()) > 1e-12 * scale)
    throw InvalidInputError("demand must sum to zero");
}

Eigen::VectorXd flow_operator_apply(const FlowObjective& obj,
                                    const Eigen::VectorXd& x) {
  const int n = obj.graph.dim();
  if (x.size() != n)
    throw InvalidInputError("point length does not match graph");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int u = 0; u < n; ++u) {
    for (const MatrixEntry& e : obj.graph.row(u)) {
      const double expo = std::log(e.value) + x[u] - x[e.index];
      check_exponent(expo, u, e.index);
      const double f = std::exp(expo);
      out[u] += f;
      out[e.index] -= f;
    }
  }
  return out;
}

}  // namespace scalebal
