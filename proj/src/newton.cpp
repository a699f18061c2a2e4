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

#include "scalebal/newton.hpp"

#include <algorithm>
#include <cmath>

namespace scalebal {

void balancing_sums(const SparseNonnegativeMatrix& a, const Eigen::VectorXd& x,
                    Eigen::VectorXd* rm, Eigen::VectorXd* cm) {
  rm->setZero(a.dim());
  cm->setZero(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    for (const MatrixEntry& e : a.row(i)) {
      const double expo = std::log(e.value) + x[i] - x[e.index];
      if (!(std::abs(expo) <= kMaxExponent))
        throw NumericError("balancing factors overflowed the exponent guard");
      const double m = std::exp(expo);
      (*rm)[i] += m;
      (*cm)[e.index] += m;
    }
  }
}

namespace {

void scaling_sums(const SparseNonnegativeMatrix& a, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y, Eigen::VectorXd* rm,
                  Eigen::VectorXd* cm) {
  rm->setZero(a.dim());
  cm->setZero(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    for (const MatrixEntry& e : a.row(i)) {
      const double expo = std::log(e.value) + x[i] + y[e.index];
      if (!(std::abs(expo) <= kMaxExponent))
        throw NumericError("scaling factors overflowed the exponent guard");
      const double m = std::exp(expo);
      (*rm)[i] += m;
      (*cm)[e.index] += m;
    }
  }
}

Eigen::VectorXd signed_copy(const Eigen::VectorXd& sign,
                            const Eigen::VectorXd& v) {
  return sign.size() ? sign.cwiseProduct(v).eval() : v;
}

}  // namespace

BoxNewtonResult box_newton_minimize(const NewtonProblem& problem,
                                    const KOracle& oracle, Eigen::VectorXd x0,
                                    const NewtonConfig& cfg) {
  BoxNewtonResult out;
  Eigen::VectorXd x = std::move(x0);
  if (problem.recenter && x.size()) x.array() -= x.mean();
  std::vector<Eigen::VectorXd> iterates;
  const bool record_iterates =
      cfg.keep_iterates ||
      static_cast<double>(x.size()) * cfg.max_iterations <= 5e7;
  out.stop = NewtonStop::kIterations;

  for (long t = 0; t < cfg.max_iterations; ++t) {
    ObjectiveEvaluation ev = problem.eval(x, true);
    const double metric =
        problem.metric ? problem.metric(x)
                       : std::numeric_limits<double>::quiet_NaN();
    if (cfg.metric_target >= 0 && problem.metric &&
        metric <= cfg.metric_target) {
      out.stop = NewtonStop::kMetric;
      break;
    }
    if (cfg.gap_target >= 0 && std::isfinite(cfg.f_reference) &&
        ev.value - cfg.f_reference <= cfg.gap_target) {
      out.stop = NewtonStop::kGap;
      break;
    }
    const double gnorm = ev.gradient.norm();
    if (gnorm == 0) {
      out.stop = NewtonStop::kStationary;
      break;
    }
    if (!ev.hessian)
      throw Error("box newton requires Hessian evaluations");

    const Eigen::VectorXd b = signed_copy(problem.sign, ev.gradient);
    double fv = 0, decrease = 0;
    Eigen::VectorXd candidate;
    OracleResult res;
    for (int attempt = 0; attempt < 2; ++attempt) {
      res = oracle.newton_subproblem(*ev.hessian, b, cfg.k);
      const double znorm = res.z.size() ? res.z.cwiseAbs().maxCoeff() : 0.0;
      if (znorm > res.k + 1e-9 * (1 + res.k)) {
        throw Error("oracle contract violation: ||z||_inf = " +
                    std::to_string(znorm) + " > k = " +
                    std::to_string(res.k));
      }
      if (res.value > 1e-10 * (1 + std::abs(ev.value))) {
        throw Error("oracle contract violation: positive model value " +
                    std::to_string(res.value));
      }
      candidate = x + signed_copy(problem.sign, res.z) / res.k;
      if (problem.recenter) candidate.array() -= candidate.mean();
      fv = problem.eval(candidate, false).value;
      decrease = ev.value - fv;
      if (decrease > 0) break;
      oracle.refresh();  // a stale reused chain may explain a bad step
    }
    if (decrease <= 0) {
      // The model promised a decrease of at least -res.value.
      if (-res.value > 1e-6 * (1 + std::abs(ev.value))) {
        throw Error(
            "non-decreasing step despite oracle value " +
            std::to_string(res.value) + "; broken Hessian or oracle");
      }
      out.stop = NewtonStop::kStagnated;
      break;
    }
    if (record_iterates) iterates.push_back(x);
    out.trace.records.push_back({t, ev.value, gnorm, metric,
                                 (candidate - x).cwiseAbs().maxCoeff(),
                                 res.value, res.k});
    x = std::move(candidate);
    ++out.iterations;
    if (decrease < cfg.stagnation_rel * std::max(1.0, std::abs(ev.value))) {
      out.stop = NewtonStop::kStagnated;
      break;
    }
  }
  out.value = problem.eval(x, false).value;
  for (const Eigen::VectorXd& xi : iterates) {
    out.trace.r_inf_observed =
        std::max(out.trace.r_inf_observed, (xi - x).cwiseAbs().maxCoeff());
  }
  out.x = std::move(x);
  return out;
}

namespace {

SparseNonnegativeMatrix submatrix_of(const SparseNonnegativeMatrix& a,
                                     const std::vector<int>& verts) {
  std::vector<int> pos(a.dim(), -1);
  for (size_t k = 0; k < verts.size(); ++k)
    pos[verts[k]] = static_cast<int>(k);
  std::vector<Triplet> ts;
  for (int v : verts) {
    for (const MatrixEntry& e : a.row(v)) {
      if (pos[e.index] >= 0) ts.push_back({pos[v], pos[e.index], e.value});
    }
  }
  return SparseNonnegativeMatrix(static_cast<int>(verts.size()),
                                 std::move(ts));
}

DiagonalFactorsResult solve_balancing_block(
    const SparseNonnegativeMatrix& block, double eps_block,
    const SolverConfig& cfg, const KOracle& oracle) {
  const BalancingObjective base(block);
  auto metric = [&block](const Eigen::VectorXd& x) {
    Eigen::VectorXd rm, cm;
    balancing_sums(block, x, &rm, &cm);
    return (rm - cm).norm() / rm.sum();
  };
  DiagonalFactorsResult out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(block.dim());
  double best_err = std::numeric_limits<double>::infinity();
  double b = cfg.b_start;
  while (true) {
    const BalancingObjective obj =
        regularize_balancing(base, std::min(eps_block, 1.0), b);
    NewtonProblem problem;
    problem.eval = [&obj](const Eigen::VectorXd& z, bool h) {
      return balancing_eval(obj, z, h);
    };
    problem.metric = metric;
    problem.recenter = true;
    NewtonConfig ncfg = cfg.newton;
    ncfg.metric_target = eps_block;
    BoxNewtonResult r = box_newton_minimize(problem, oracle, x, ncfg);
    out.iterations += r.iterations;
    out.box_bound = b;
    const double err = metric(r.x);
    if (err < best_err) {
      best_err = err;
      out.factors.x = r.x;
      out.error = err;
      out.trace = std::move(r.trace);
    }
    if (err <= eps_block) {
      out.status = SolveStatus::kConverged;
      return out;
    }
    if (b >= cfg.b_cap) {
      out.status = SolveStatus::kCapExceeded;
      return out;
    }
    b = std::min(2 * b, cfg.b_cap);
    x = r.x.cwiseMax(-b).cwiseMin(b);
    oracle.refresh();
  }
}

}  // namespace

DiagonalFactorsResult balance_per_component(const SparseNonnegativeMatrix& a,
                                            double eps,
                                            const BlockBalancer& solver,
                                            bool collect_trace) {
  const int n = a.dim();
  DiagonalFactorsResult out;
  out.factors.x = Eigen::VectorXd::Zero(n);
  if (a.nnz() == 0) {
    out.error = 0;
    out.kappa = 1;
    return out;
  }

  const SccDecomposition scc = scc_decompose(a);
  const bool single_block = scc.is_strongly_connected;
  const double eps_block = single_block ? eps : eps / 2;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  size_t trace_block_size = 0;
  for (const std::vector<int>& comp : scc.components) {
    if (comp.size() < 2) continue;
    const SparseNonnegativeMatrix block = submatrix_of(a, comp);
    DiagonalFactorsResult r = solver(block, eps_block);
    for (size_t k = 0; k < comp.size(); ++k) x[comp[k]] = r.factors.x[k];
    out.iterations += r.iterations;
    out.box_bound = std::max(out.box_bound, r.box_bound);
    if (r.status != SolveStatus::kConverged) out.status = r.status;
    if (collect_trace && comp.size() > trace_block_size) {
      trace_block_size = comp.size();
      out.trace = std::move(r.trace);
    }
  }

  // Cross-block suppression: push every off-diagonal-block entry below a
  // threshold by spreading the blocks apart along the topological order.
  long m_cross = 0;
  double s_blocks = 0;
  for (int i = 0; i < n; ++i) {
    for (const MatrixEntry& e : a.row(i)) {
      if (scc.component_id[i] == scc.component_id[e.index]) {
        s_blocks += e.value * std::exp(x[i] - x[e.index]);
      } else {
        ++m_cross;
      }
    }
  }
  if (m_cross > 0) {
    const double s_a = matrix_stats(a).entry_sum;
    const double s_ref = s_blocks > 0 ? s_blocks : s_a;
    const double tau = std::min(eps * s_a / n,
                                eps * s_ref / (6.0 * (m_cross + 1)));
    double delta = 0;
    double min_cross_expo = 0;
    for (int i = 0; i < n; ++i) {
      for (const MatrixEntry& e : a.row(i)) {
        const int gap = scc.component_id[e.index] - scc.component_id[i];
        if (gap == 0) continue;
        const double expo = std::log(e.value) + x[i] - x[e.index];
        delta = std::max(delta, (expo - std::log(tau)) / gap);
        min_cross_expo = std::min(min_cross_expo, expo);
      }
    }
    // Keep suppressed exponents above the overflow guard.
    const int spread = static_cast<int>(scc.components.size()) - 1;
    const double delta_cap =
        (650.0 + min_cross_expo) / std::max(1, spread);
    delta = std::max(0.0, std::min(delta, delta_cap));
    for (int v = 0; v < n; ++v) x[v] += scc.component_id[v] * delta;
    out.note = "suppressed " + std::to_string(m_cross) +
               " cross-block entries below " + std::to_string(tau);
  }

  out.factors.x = x;
  out.kappa = out.factors.kappa();
  Eigen::VectorXd rm, cm;
  balancing_sums(a, x, &rm, &cm);
  out.objective = rm.sum();
  if (s_blocks > 0 || m_cross == 0) {
    out.error = (rm - cm).norm() / rm.sum();
  } else {
    // Pure-DAG pattern: no balanceable mass; report relative to s_A.
    out.error = (rm - cm).norm() / matrix_stats(a).entry_sum;
    out.note += "; all components are singletons, error relative to s_A";
  }
  if (out.status == SolveStatus::kConverged && out.error > eps)
    out.status = SolveStatus::kCapExceeded;
  return out;
}

DiagonalFactorsResult solve_balancing(const SparseNonnegativeMatrix& a,
                                      double eps, const SolverConfig& cfg,
                                      const KOracle* oracle) {
  if (!(eps > 0)) throw InvalidInputError("eps must be positive");
  ChainOracle fallback;
  if (!oracle) oracle = &fallback;
  return balance_per_component(
      a, eps,
      [&](const SparseNonnegativeMatrix& block, double eps_block) {
        return solve_balancing_block(block, eps_block, cfg, *oracle);
      },
      cfg.collect_trace);
}

DiagonalFactorsResult solve_scaling(const SparseNonnegativeMatrix& a,
                                    const Eigen::VectorXd& r,
                                    const Eigen::VectorXd& c, double eps,
                                    const SolverConfig& cfg,
                                    const KOracle* oracle) {
  if (!(eps > 0)) throw InvalidInputError("eps must be positive");
  ChainOracle fallback;
  if (!oracle) oracle = &fallback;
  const int n = a.dim();
  if (r.size() != n || c.size() != n)
    throw InvalidInputError("target length does not match dimension");

  DiagonalFactorsResult out;
  out.factors.x = Eigen::VectorXd::Zero(n);
  out.factors.y = Eigen::VectorXd::Zero(n);
  if (check_scalable(a, r, c) == Scalability::kInfeasible) {
    out.status = SolveStatus::kInfeasible;
    out.error = std::numeric_limits<double>::infinity();
    return out;
  }

  // Shrink A, r, c and eps jointly so that ||r||_inf, ||c||_inf <= 1. The
  // factors of the shrunk problem solve the original one.
  const double gamma =
      std::max({1.0, r.maxCoeff(), c.maxCoeff()});
  SparseNonnegativeMatrix awork = a;
  Eigen::VectorXd rw = r, cw = c;
  double eps_work = eps;
  if (gamma > 1.0) {
    std::vector<Triplet> ts = a.triplets();
    for (Triplet& t : ts) t.value /= gamma;
    awork = SparseNonnegativeMatrix(n, std::move(ts));
    rw /= gamma;
    cw /= gamma;
    eps_work = eps / (gamma * gamma);
  }

  const ScalingObjective base(awork, rw, cw);
  auto metric = [&awork, &rw, &cw, n](const Eigen::VectorXd& z) {
    Eigen::VectorXd rm, cm;
    scaling_sums(awork, z.head(n), z.tail(n), &rm, &cm);
    return (rm - rw).squaredNorm() + (cm - cw).squaredNorm();
  };
  Eigen::VectorXd sign(2 * n);
  sign.head(n).setOnes();
  sign.tail(n).setConstant(-1.0);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * n);
  double best_err = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_z = z;
  double b = cfg.b_start;
  while (true) {
    const ScalingObjective obj =
        regularize_scaling(base, std::min(eps_work, 1.0), b);
    NewtonProblem problem;
    problem.eval = [&obj, n](const Eigen::VectorXd& v, bool h) {
      return scaling_eval(obj, v.head(n), v.tail(n), h);
    };
    problem.metric = metric;
    problem.sign = sign;
    NewtonConfig ncfg = cfg.newton;
    ncfg.metric_target = eps_work;
    BoxNewtonResult rres = box_newton_minimize(problem, *oracle, z, ncfg);
    out.iterations += rres.iterations;
    out.box_bound = b;
    const double err = metric(rres.x);
    if (err < best_err) {
      best_err = err;
      best_z = rres.x;
      if (cfg.collect_trace) out.trace = std::move(rres.trace);
    }
    if (err <= eps_work) {
      out.status = SolveStatus::kConverged;
      break;
    }
    if (b >= cfg.b_cap) {
      out.status = SolveStatus::kCapExceeded;
      break;
    }
    b = std::min(2 * b, cfg.b_cap);
    z = rres.x.cwiseMax(-b).cwiseMin(b);
    oracle->refresh();
  }

  out.factors.x = best_z.head(n);
  out.factors.y = best_z.tail(n);
  out.kappa = out.factors.kappa();
  Eigen::VectorXd rm, cm;
  scaling_sums(a, out.factors.x, out.factors.y, &rm, &cm);
  out.error = (rm - r).squaredNorm() + (cm - c).squaredNorm();
  out.objective = rm.sum() - r.dot(out.factors.x) - c.dot(out.factors.y);
  return out;
}

}  // namespace scalebal
