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

#include "scalebal/ipm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "scalebal/newton.hpp"
#include "scalebal/objectives.hpp"

namespace scalebal {

ConeProgram build_cone_program(const SparseNonnegativeMatrix& a,
                               const Eigen::VectorXd& d, double b_x) {
  if (a.nnz() == 0) throw InvalidInputError("matrix has no entries");
  if (d.size() != a.dim())
    throw InvalidInputError("demand length does not match dimension");
  if (!(b_x > 0)) throw InvalidInputError("B_x must be positive");
  ConeProgram prog(a);
  prog.d = d;
  prog.b_x = b_x;
  prog.u = matrix_stats(a).entry_sum + d.cwiseAbs().sum() * b_x;
  prog.edges.reserve(a.nnz());
  for (int i = 0; i < a.dim(); ++i)
    for (const MatrixEntry& e : a.row(i))
      prog.edges.push_back({i, e.index, std::log(e.value)});
  return prog;
}

namespace {

struct InteriorState {
  Eigen::VectorXd g;        // ln t - (ln A + x_i - x_j), per edge, > 0
  Eigen::VectorXd cap;      // 3U - t, per edge, > 0
  Eigen::VectorXd box_lo;   // B + x, > 0
  Eigen::VectorXd box_hi;   // B - x, > 0
};

// Computes the interior slack quantities or reports which constraint fails.
InteriorState interior_state(const ConeProgram& prog, const Eigen::VectorXd& t,
                             const Eigen::VectorXd& x) {
  const int m = prog.m(), n = prog.n();
  if (t.size() != m || x.size() != n)
    throw InvalidInputError("point size does not match program");
  InteriorState s;
  s.g.resize(m);
  s.cap.resize(m);
  for (int e = 0; e < m; ++e) {
    const auto& ed = prog.edges[e];
    if (!(t[e] > 0))
      throw InvalidInputError("t[" + std::to_string(e) + "] <= 0");
    s.g[e] = std::log(t[e]) - (ed.log_a + x[ed.i] - x[ed.j]);
    if (!(s.g[e] > 0)) {
      throw InvalidInputError("cone constraint violated at edge " +
                              std::to_string(e) + " (slack " +
                              std::to_string(s.g[e]) + ")");
    }
    s.cap[e] = 3 * prog.u - t[e];
    if (!(s.cap[e] > 0))
      throw InvalidInputError("t cap violated at edge " + std::to_string(e));
  }
  s.box_lo = prog.b_x + x.array();
  s.box_hi = prog.b_x - x.array();
  if (s.box_lo.minCoeff() <= 0 || s.box_hi.minCoeff() <= 0)
    throw InvalidInputError("x box constraint violated");
  return s;
}

bool is_interior(const ConeProgram& prog, const Eigen::VectorXd& t,
                 const Eigen::VectorXd& x) {
  const int m = prog.m();
  if ((t.array() <= 0).any()) return false;
  if ((t.array() >= 3 * prog.u).any()) return false;
  if (x.cwiseAbs().maxCoeff() >= prog.b_x) return false;
  for (int e = 0; e < m; ++e) {
    const auto& ed = prog.edges[e];
    if (std::log(t[e]) - (ed.log_a + x[ed.i] - x[ed.j]) <= 0) return false;
  }
  return true;
}

}  // namespace

HessianFactorization hessian_factorize(const ConeProgram& prog,
                                       const Eigen::VectorXd& t,
                                       const Eigen::VectorXd& x) {
  const InteriorState s = interior_state(prog, t, x);
  const int m = prog.m(), n = prog.n();
  HessianFactorization fact;
  fact.m = m;
  fact.n = n;
  fact.t_pivot.resize(m);
  fact.coupling.resize(m);
  fact.edge_xs.resize(m);
  Eigen::VectorXd x_diag(n);
  for (int i = 0; i < n; ++i) {
    x_diag[i] = 1.0 / (s.box_hi[i] * s.box_hi[i]) +
                1.0 / (s.box_lo[i] * s.box_lo[i]);
  }
  std::vector<Triplet> x_edges;
  x_edges.reserve(m);
  for (int e = 0; e < m; ++e) {
    const auto& ed = prog.edges[e];
    const double sqrt_alpha = 1.0 / s.g[e];
    const double alpha = sqrt_alpha * sqrt_alpha;
    const double beta = alpha + sqrt_alpha + 1.0;
    const double pivot =
        beta / (t[e] * t[e]) + 1.0 / (s.cap[e] * s.cap[e]);
    fact.t_pivot[e] = pivot;
    fact.edge_xs[e] = {ed.i, ed.j};
    if (ed.i == ed.j) {
      fact.coupling[e] = 0;  // self-loop: no x coupling
      continue;
    }
    const double coup = alpha / t[e];
    fact.coupling[e] = coup;
    // Eliminating t_e leaves weight alpha - coup^2/pivot on the (i, j) edge.
    const double w = alpha - coup * coup / pivot;
    x_edges.push_back({ed.i, ed.j, w});
    x_diag[ed.i] += w;
    x_diag[ed.j] += w;
  }
  fact.s_xx.emplace(std::move(x_diag), std::move(x_edges));
  return fact;
}

Eigen::MatrixXd HessianFactorization::dense_u() const {
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(m + n, m + n);
  for (int e = 0; e < m; ++e) {
    if (coupling[e] == 0) continue;
    const auto [i, j] = edge_xs[e];
    u(m + i, e) = -coupling[e] / t_pivot[e];
    u(m + j, e) = coupling[e] / t_pivot[e];
  }
  return u;
}

Eigen::MatrixXd HessianFactorization::dense_s() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m + n, m + n);
  for (int e = 0; e < m; ++e) s(e, e) = t_pivot[e];
  s.bottomRightCorner(n, n) = s_xx->dense();
  return s;
}

Eigen::VectorXd hessian_solve(const HessianFactorization& fact,
                              const Eigen::VectorXd& rhs, double eps) {
  if (!(eps > 0 && eps <= 0.1))
    throw InvalidInputError("hessian_solve requires eps in (0, 0.1]");
  const int m = fact.m, n = fact.n;
  if (rhs.size() != m + n) throw InvalidInputError("rhs size mismatch");
  // U z = rhs (forward substitution; U couples x rows to t columns).
  Eigen::VectorXd z_t = rhs.head(m);
  Eigen::VectorXd z_x = rhs.tail(n);
  for (int e = 0; e < m; ++e) {
    if (fact.coupling[e] == 0) continue;
    const auto [i, j] = fact.edge_xs[e];
    const double w = fact.coupling[e] / fact.t_pivot[e];
    z_x[i] += w * z_t[e];
    z_x[j] -= w * z_t[e];
  }
  // S w = z.
  Eigen::VectorXd w_t = z_t.cwiseQuotient(fact.t_pivot);
  Eigen::VectorXd w_x(n);
  if (m + n <= 400) {
    w_x = fact.s_xx->dense().ldlt().solve(z_x);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(eps * 1e-2);
    cg.setMaxIterations(40L * n + 1000);
    cg.compute(fact.s_xx->sparse());
    w_x = cg.solve(z_x);
    if (cg.info() != Eigen::Success)
      throw NumericError("PCG did not converge on the S block");
  }
  // U^T y = w (backward substitution): y_t = w_t - W^T y_x.
  Eigen::VectorXd y(m + n);
  y.tail(n) = w_x;
  for (int e = 0; e < m; ++e) {
    double acc = w_t[e];
    if (fact.coupling[e] != 0) {
      const auto [i, j] = fact.edge_xs[e];
      const double w = fact.coupling[e] / fact.t_pivot[e];
      acc += w * w_x[i];
      acc -= w * w_x[j];
    }
    y[e] = acc;
  }
  return y;
}

BarrierEvaluation barrier_eval(const ConeProgram& prog,
                               const Eigen::VectorXd& t,
                               const Eigen::VectorXd& x, double mu,
                               bool want_hessian) {
  const InteriorState s = interior_state(prog, t, x);
  const int m = prog.m(), n = prog.n();
  BarrierEvaluation ev;
  ev.gradient.setZero(m + n);
  double xi = 0;
  for (int e = 0; e < m; ++e) {
    const auto& ed = prog.edges[e];
    const double sqrt_alpha = 1.0 / s.g[e];
    xi += -std::log(s.g[e]) - std::log(t[e]) - std::log(s.cap[e]);
    ev.gradient[e] += -(sqrt_alpha + 1.0) / t[e] + 1.0 / s.cap[e];
    if (ed.i != ed.j) {
      ev.gradient[m + ed.i] += sqrt_alpha;
      ev.gradient[m + ed.j] -= sqrt_alpha;
    }
  }
  for (int i = 0; i < n; ++i) {
    xi += -std::log(s.box_hi[i]) - std::log(s.box_lo[i]);
    ev.gradient[m + i] += 1.0 / s.box_hi[i] - 1.0 / s.box_lo[i];
  }
  ev.barrier = xi;
  ev.value = mu * prog.objective(t, x) + xi;
  ev.gradient.head(m).array() += mu;
  ev.gradient.tail(n) -= mu * prog.d;
  if (want_hessian) ev.factorization = hessian_factorize(prog, t, x);
  return ev;
}

IpmPathResult ipm_path_follow(const ConeProgram& prog, double eps_obj,
                              const IpmOptions& opts) {
  if (!(eps_obj > 0)) throw InvalidInputError("eps_obj must be positive");
  const int m = prog.m(), n = prog.n();
  const double nu = prog.nu();
  IpmPathResult out;
  out.t = Eigen::VectorXd::Constant(m, 2 * prog.u);
  out.x = Eigen::VectorXd::Zero(n);

  // mu_0: keep the start near-centered, mu ||c||_{H0^{-1}} <= 1/8.
  Eigen::VectorXd c(m + n);
  c.head(m).setOnes();
  c.tail(n) = -prog.d;
  {
    const BarrierEvaluation ev0 =
        barrier_eval(prog, out.t, out.x, 0.0, true);
    const Eigen::VectorXd hc = hessian_solve(*ev0.factorization, c, 0.01);
    const double cnorm = std::sqrt(std::max(0.0, c.dot(hc)));
    out.trace.r_inf_observed = 0;
    double mu = cnorm > 0 ? 1.0 / (8.0 * cnorm) : 1.0;

    const double mu_growth =
        1.0 + (opts.aggressive_schedule ? 1.0 : 0.125) / std::sqrt(nu);
    long iter = 0;
    bool done = false;
    while (!done) {
      // Centering at the current mu.
      long centering = 0;
      while (true) {
        if (iter >= opts.max_newton_steps)
          throw Error("IPM exceeded the Newton step budget");
        BarrierEvaluation ev =
            barrier_eval(prog, out.t, out.x, mu, true);
        Eigen::VectorXd dir =
            hessian_solve(*ev.factorization, ev.gradient, opts.solve_eps);
        const double decrement =
            std::sqrt(std::max(0.0, ev.gradient.dot(dir)));
        if (decrement <= 1.0 / 6.0) break;
        if (++centering > opts.max_centering_steps)
          throw Error("IPM centering failed to contract; aborting");
        const bool full_step = decrement <= 0.25;
        double eta = full_step ? 1.0 : 1.0 / (1.0 + decrement);
        // Fraction-to-the-boundary on the linear constraints, then
        // backtracking until the cone constraints hold.
        for (int e = 0; e < m; ++e) {
          const double dt = dir[e];
          if (dt > 0) eta = std::min(eta, 0.99 * out.t[e] / dt);
          if (dt < 0) eta = std::min(eta, 0.99 * (3 * prog.u - out.t[e]) / -dt);
        }
        for (int i = 0; i < n; ++i) {
          const double dx = dir[m + i];
          if (dx > 0) eta = std::min(eta, 0.99 * (prog.b_x + out.x[i]) / dx);
          if (dx < 0) eta = std::min(eta, 0.99 * (prog.b_x - out.x[i]) / -dx);
        }
        Eigen::VectorXd t_new, x_new;
        int backtracks = 0;
        while (true) {
          t_new = out.t - eta * dir.head(m);
          x_new = out.x - eta * dir.tail(n);
          if (is_interior(prog, t_new, x_new)) break;
          eta *= 0.5;
          if (++backtracks > 60)
            throw Error("IPM step cannot stay interior; aborting");
        }
        const double step_inf =
            std::max((out.t - t_new).cwiseAbs().maxCoeff(),
                     (out.x - x_new).cwiseAbs().maxCoeff());
        out.t = std::move(t_new);
        out.x = std::move(x_new);
        ++iter;
        ++out.newton_steps;
        out.trace.records.push_back(
            {iter, prog.objective(out.t, out.x), ev.gradient.norm(),
             opts.metric ? opts.metric(out.x) : 0.0, step_inf, decrement,
             0.0});
        if (full_step && eta == 1.0 && opts.check_decrements) {
          BarrierEvaluation chk =
              barrier_eval(prog, out.t, out.x, mu, true);
          Eigen::VectorXd d2 = hessian_solve(*chk.factorization,
                                             chk.gradient, opts.solve_eps);
          const double after =
              std::sqrt(std::max(0.0, chk.gradient.dot(d2)));
          if (after > 1.0 / 6.0 + 1e-9) ++out.decrement_violations;
        }
      }
      if (opts.metric && opts.metric_target >= 0 &&
          opts.metric(out.x) <= opts.metric_target) {
        out.metric_reached = true;
        break;
      }
      if (nu / mu <= eps_obj / 2) {
        done = true;
        break;
      }
      mu *= mu_growth;
    }
  }
  out.objective = prog.objective(out.t, out.x);
  return out;
}

namespace {

DiagonalFactorsResult ipm_balance_block(const SparseNonnegativeMatrix& block,
                                        double eps_block,
                                        const IpmSolverConfig& cfg) {
  DiagonalFactorsResult out;
  const int n = block.dim();
  auto metric = [&block](const Eigen::VectorXd& x) {
    Eigen::VectorXd rm, cm;
    balancing_sums(block, x, &rm, &cm);
    return (rm - cm).norm() / rm.sum();
  };
  const double l = matrix_stats(block).min_nonzero;
  const double eps_capped = std::min(eps_block, 1.0);
  const double eps_obj = eps_capped * eps_capped * l / 8.0;
  double best_err = std::numeric_limits<double>::infinity();
  double b = std::max(1.0, cfg.b_start);
  while (true) {
    const ConeProgram prog =
        build_cone_program(block, Eigen::VectorXd::Zero(n), b);
    IpmOptions opts = cfg.ipm;
    opts.metric = metric;
    opts.metric_target = eps_block;
    IpmPathResult r = ipm_path_follow(prog, eps_obj, opts);
    out.iterations += r.newton_steps;
    out.box_bound = b;
    const double err = metric(r.x);
    if (err < best_err) {
      best_err = err;
      out.factors.x = r.x;
      out.error = err;
      out.objective = r.objective;
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
  }
}

}  // namespace

DiagonalFactorsResult ipm_balance(const SparseNonnegativeMatrix& a, double eps,
                                  const IpmSolverConfig& cfg) {
  if (!(eps > 0)) throw InvalidInputError("eps must be positive");
  return balance_per_component(
      a, eps,
      [&](const SparseNonnegativeMatrix& block, double eps_block) {
        return ipm_balance_block(block, eps_block, cfg);
      },
      cfg.collect_trace);
}

DiagonalFactorsResult ipm_scale(const SparseNonnegativeMatrix& a,
                                const Eigen::VectorXd& r,
                                const Eigen::VectorXd& c, double eps,
                                const IpmSolverConfig& cfg) {
  if (!(eps > 0)) throw InvalidInputError("eps must be positive");
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

  const double gamma = std::max({1.0, r.maxCoeff(), c.maxCoeff()});
  Eigen::VectorXd rw = r / gamma, cw = c / gamma;
  std::vector<Triplet> ts = a.triplets();
  // Block embedding [[0, A], [0, 0]] with demand (r, -c): the IPM works in
  // the e^{x_i - x_j} convention, so the column factors come back negated.
  std::vector<Triplet> embedded;
  embedded.reserve(ts.size());
  for (const Triplet& t : ts)
    embedded.push_back({t.row, n + t.col, t.value / gamma});
  const SparseNonnegativeMatrix ahat(2 * n, std::move(embedded));
  Eigen::VectorXd d(2 * n);
  d.head(n) = rw;
  d.tail(n) = -cw;
  const double eps_work = eps / (gamma * gamma);

  auto metric = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd rm, cm;
    balancing_sums(ahat, z, &rm, &cm);
    return (rm.head(n) - rw).squaredNorm() + (cm.tail(n) - cw).squaredNorm();
  };
  const double eps_capped = std::min(eps_work, 1.0);
  const double eps_obj = eps_capped * eps_capped / (3.0 * n);
  double best_err = std::numeric_limits<double>::infinity();
  double b = std::max(1.0, cfg.b_start);
  while (true) {
    const ConeProgram prog = build_cone_program(ahat, d, b);
    IpmOptions opts = cfg.ipm;
    opts.metric = metric;
    opts.metric_target = eps_work;
    IpmPathResult r2 = ipm_path_follow(prog, eps_obj, opts);
    out.iterations += r2.newton_steps;
    out.box_bound = b;
    const double err = metric(r2.x);
    if (err < best_err) {
      best_err = err;
      out.factors.x = r2.x.head(n);
      out.factors.y = -r2.x.tail(n);
      out.objective = r2.objective;
      if (cfg.collect_trace) out.trace = std::move(r2.trace);
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
  }
  out.kappa = out.factors.kappa();
  Eigen::VectorXd rm(n), cm(n);
  {
    Eigen::VectorXd rfull, cfull;
    // Row sums of D(e^x) A D(e^y) on the original matrix.
    SparseNonnegativeMatrix scaled =
        apply_scaling(a, out.factors.x, out.factors.y);
    rfull = scaled.row_sums();
    cfull = scaled.col_sums();
    out.error = (rfull - r).squaredNorm() + (cfull - c).squaredNorm();
  }
  return out;
}

}  // namespace scalebal
