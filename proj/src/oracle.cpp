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

#include "scalebal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scalebal {

std::vector<int> find_strong_subset(const SddMatrix& m, double alpha) {
  const int n = m.dim();
  if (n < 1) throw InvalidInputError("empty matrix");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> rel_slack(n);
  for (int i = 0; i < n; ++i)
    rel_slack[i] = m.diag(i) > 0 ? m.slack(i) / m.diag(i) : -1.0;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rel_slack[a] > rel_slack[b];
  });

  std::vector<bool> in_f(n, false);
  std::vector<double> f_mass(n, 0);  // within-F off-diagonal mass
  std::vector<int> f;
  for (int v : order) {
    if (!(m.diag(v) > 0)) continue;
    double mass_v = 0;
    bool ok = true;
    for (const MatrixEntry& e : m.neighbors(v)) {
      if (!in_f[e.index]) continue;
      mass_v += e.value;
      // Admitting v adds weight to the admitted neighbor's row too.
      if (m.diag(e.index) < (1 + alpha) * (f_mass[e.index] + e.value)) {
        ok = false;
        break;
      }
    }
    if (!ok || m.diag(v) < (1 + alpha) * mass_v) continue;
    in_f[v] = true;
    f_mass[v] = mass_v;
    for (const MatrixEntry& e : m.neighbors(v))
      if (in_f[e.index]) f_mass[e.index] += e.value;
    f.push_back(v);
  }
  std::sort(f.begin(), f.end());
  return f;
}

VoltageExtension::VoltageExtension(std::shared_ptr<const SddMatrix> m,
                                   std::vector<int> f, double eps,
                                   double alpha)
    : m_(std::move(m)), f_(std::move(f)) {
  if (!(eps > 0 && eps <= 0.5))
    throw InvalidInputError("mapping eps must be in (0, 1/2]");
  const int n = m_->dim();
  in_f_.assign(n, false);
  for (int v : f_) in_f_[v] = true;
  c_ = complement_of(f_, n);
  external_degree_.resize(f_.size());
  for (size_t k = 0; k < f_.size(); ++k) {
    const int v = f_[k];
    double internal = 0;
    for (const MatrixEntry& e : m_->neighbors(v))
      if (in_f_[e.index]) internal += e.value;
    external_degree_[k] = m_->diag(v) - internal;
    if (!(external_degree_[k] > 0)) {
      throw NumericError("zero external degree at vertex " +
                         std::to_string(v) +
                         "; F block is not strongly dominant");
    }
  }
  // One extra round absorbs the D-norm to M-norm conversion constants in
  // the error analysis.
  const double t = (std::log(std::sqrt(1.0 + 1.0 / alpha)) +
                    std::log(1.0 / eps)) /
                   std::log(1.0 + alpha);
  iterations_ = std::max(1, static_cast<int>(std::ceil(t)) + 1);
}

Eigen::VectorXd VoltageExtension::apply(const Eigen::VectorXd& x_hat) const {
  const int n = m_->dim();
  if (x_hat.size() != static_cast<Eigen::Index>(c_.size()))
    throw InvalidInputError("extension input must live on C");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (size_t k = 0; k < c_.size(); ++k) x[c_[k]] = x_hat[k];
  // Initial guess: external-degree-weighted average of C neighbors.
  for (size_t k = 0; k < f_.size(); ++k) {
    const int v = f_[k];
    double acc = 0;
    for (const MatrixEntry& e : m_->neighbors(v))
      if (!in_f_[e.index]) acc += e.value * x[e.index];
    x[v] = acc / external_degree_[k];
  }
  Eigen::VectorXd next(f_.size());
  for (int t = 0; t < iterations_; ++t) {
    for (size_t k = 0; k < f_.size(); ++k) {
      const int v = f_[k];
      double acc = 0;
      for (const MatrixEntry& e : m_->neighbors(v)) acc += e.value * x[e.index];
      next[k] = acc / m_->diag(v);
    }
    for (size_t k = 0; k < f_.size(); ++k) x[f_[k]] = next[k];
  }
  return x;
}

Eigen::VectorXd VoltageExtension::apply_transpose(
    const Eigen::VectorXd& y) const {
  const int n = m_->dim();
  if (y.size() != n)
    throw InvalidInputError("transpose input must live on all vertices");
  Eigen::VectorXd z = y;
  // Transposes of the averaging rounds, in reverse order (they are all the
  // same map, so order does not matter).
  Eigen::VectorXd scaled(f_.size());
  for (int t = 0; t < iterations_; ++t) {
    for (size_t k = 0; k < f_.size(); ++k)
      scaled[k] = z[f_[k]] / m_->diag(f_[k]);
    for (size_t k = 0; k < f_.size(); ++k) z[f_[k]] = 0;
    for (size_t k = 0; k < f_.size(); ++k) {
      const int v = f_[k];
      for (const MatrixEntry& e : m_->neighbors(v))
        z[e.index] += e.value * scaled[k];
    }
  }
  // Transpose of the initial extension step.
  Eigen::VectorXd out(c_.size());
  std::vector<int> pos(n, -1);
  for (size_t k = 0; k < c_.size(); ++k) pos[c_[k]] = static_cast<int>(k);
  for (size_t k = 0; k < c_.size(); ++k) out[k] = z[c_[k]];
  for (size_t k = 0; k < f_.size(); ++k) {
    const int v = f_[k];
    const double coeff = z[v] / external_degree_[k];
    for (const MatrixEntry& e : m_->neighbors(v))
      if (!in_f_[e.index]) out[pos[e.index]] += e.value * coeff;
  }
  return out;
}

VoltageExtension approx_mapping(std::shared_ptr<const SddMatrix> m,
                                std::vector<int> f, double eps, double alpha) {
  return VoltageExtension(std::move(m), std::move(f), eps, alpha);
}

Eigen::VectorXd fast_solve(const SddMatrix& m, const Eigen::VectorXd& b,
                           double eps) {
  const int n = m.dim();
  if (b.size() != n) throw InvalidInputError("rhs size mismatch");
  if (!(eps > 0 && eps < 1)) throw InvalidInputError("eps must be in (0, 1)");
  constexpr double kAlpha = 4.0;
  for (int i = 0; i < n; ++i) {
    const double deg = m.diag(i) - m.slack(i);
    if (!(m.diag(i) > 0) ||
        m.diag(i) < (1 + kAlpha) * deg - 1e-9 * m.diag(i)) {
      throw InvalidInputError("fast_solve requires a 4-SDD matrix");
    }
  }
  const Eigen::VectorXd dsqrt = m.diag().cwiseSqrt();
  const Eigen::VectorXd bound = 2.0 * dsqrt;  // |z_i| <= 2 sqrt(D_ii)
  const Eigen::VectorXd bs = b.cwiseQuotient(dsqrt);
  const double step = (1 + kAlpha) / (2 + kAlpha);
  const int iters =
      std::max(3, static_cast<int>(std::ceil(std::log(1.0 / eps) /
                                             std::log(3.0))) +
                      2);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x(n), grad(n);
  for (int t = 0; t < iters; ++t) {
    x = z.cwiseQuotient(dsqrt);
    grad = m.apply(x).cwiseQuotient(dsqrt) + bs;
    z -= step * grad;
    z = z.cwiseMax(-bound).cwiseMin(bound);
  }
  return z.cwiseQuotient(dsqrt);
}

double trivial_solve(double m, double b) {
  if (m < 0) throw InvalidInputError("matrix must be nonnegative");
  const auto value = [&](double x) { return 0.5 * m * x * x + b * x; };
  double best = 0, best_value = 0;  // x = 0 is always a candidate
  auto consider = [&](double x) {
    const double v = value(x);
    if (v < best_value ||
        (v == best_value && std::abs(x) < std::abs(best))) {
      best = x;
      best_value = v;
    }
  };
  consider(1.0);
  consider(-1.0);
  if (m > 0) {
    const double interior = -b / m;
    if (std::abs(interior) <= 1.0) consider(interior);
  }
  return best;
}

SparsifierChain build_chain(const SddMatrix& m, double delta, double alpha) {
  if (!(delta > 0 && delta <= 1)) throw InvalidInputError("delta in (0, 1]");
  if (alpha < 4) throw InvalidInputError("alpha must be at least 4");
  SparsifierChain chain;
  chain.delta = delta;
  chain.eps0 = delta / 4;
  auto cur = std::make_shared<const SddMatrix>(m);
  int i = 1;
  while (cur->dim() > 1) {
    std::vector<int> f = find_strong_subset(*cur, alpha);
    if (static_cast<int>(f.size()) == cur->dim()) f.pop_back();
    if (f.empty()) {
      throw NumericError(
          "chain construction failed to shrink at dimension " +
          std::to_string(cur->dim()));
    }
    const double eps_i = delta / (4.0 * std::pow(2.0, i));
    ChainLevel level;
    level.matrix = cur;
    level.f = f;
    level.eps = eps_i;
    level.alpha = alpha;
    level.mapping = std::make_shared<const VoltageExtension>(
        approx_mapping(cur, f, eps_i, alpha));
    level.f_block = std::make_shared<const SddMatrix>(cur->submatrix(f));
    chain.levels.push_back(std::move(level));
    cur = std::make_shared<const SddMatrix>(schur_complement(*cur, f));
    ++i;
  }
  ChainLevel last;
  last.matrix = cur;
  last.alpha = alpha;
  chain.levels.push_back(std::move(last));
  double eps_sum = chain.eps0;
  for (const ChainLevel& l : chain.levels) eps_sum += l.eps;
  if (2 * eps_sum > delta + 1e-12)
    throw NumericError("chain eps budget exceeded");
  return chain;
}

OracleResult optimize_chain(const SparsifierChain& chain,
                            const Eigen::VectorXd& b, double quad_scale,
                            double eps0_override) {
  const int d = chain.depth();
  const double eps0 = eps0_override >= 0 ? eps0_override : chain.eps0;
  std::vector<Eigen::VectorXd> bs(d);
  bs[0] = b / std::exp(eps0);
  for (int i = 0; i + 1 < d; ++i) {
    const ChainLevel& level = chain.levels[i];
    bs[i + 1] = level.mapping->apply_transpose(bs[i]) /
                (std::exp(level.eps) *
                 (1 + level.eps + level.eps * level.eps));
  }
  Eigen::VectorXd x(1);
  x[0] = trivial_solve(quad_scale * chain.levels[d - 1].matrix->diag(0),
                       bs[d - 1][0]);
  for (int i = d - 2; i >= 0; --i) {
    const ChainLevel& level = chain.levels[i];
    Eigen::VectorXd lifted = level.mapping->apply(x);
    Eigen::VectorXd bf(level.f.size());
    for (size_t k = 0; k < level.f.size(); ++k) bf[k] = bs[i][level.f[k]];
    // min over the box of 1/2 x'(sM)x + <b,x> has the same argmin and a
    // proportional value to 1/2 x'Mx + <b/s,x>.
    const Eigen::VectorXd xf =
        fast_solve(*level.f_block, bf / quad_scale, level.eps);
    for (size_t k = 0; k < level.f.size(); ++k) lifted[level.f[k]] += xf[k];
    x = std::move(lifted);
  }
  OracleResult res;
  res.depth = d;
  res.k = chain.quality();
  res.value = 0.5 * quad_scale * chain.levels[0].matrix->quad(x) + b.dot(x);
  res.z = std::move(x);
  const double norm = res.z.cwiseAbs().maxCoeff();
  if (norm > res.k + 1e-9) {
    throw NumericError("oracle output norm " + std::to_string(norm) +
                       " exceeds k = " + std::to_string(res.k));
  }
  if (res.value > 1e-12 * (1 + std::abs(b.cwiseAbs().sum()))) {
    throw NumericError("oracle value " + std::to_string(res.value) +
                       " is positive; contract violated");
  }
  return res;
}

OracleResult KOracle::newton_subproblem(const SddMatrix& hessian,
                                        const Eigen::VectorXd& grad,
                                        double k_override) const {
  const double k = k_override > 0 ? k_override : quality(hessian);
  const double e2 = std::exp(2.0);
  OracleResult res = solve(hessian.scaled(e2 / (k * k)), grad / k);
  res.k = k;  // the step is z / k
  return res;
}

ChainOracle::ChainOracle(ChainOptions options) : options_(options) {}

std::pair<std::shared_ptr<const SparsifierChain>, double>
ChainOracle::chain_for(const SddMatrix& a) const {
  // Reuse while weights and relative slacks stay within e^{+-eps0} of the
  // anchor. Slacks below 1e-12 * diag on both sides count as equal (pure
  // Laplacian rows keep cancellation noise out of the ratio).
  if (reuse_.chain &&
      reuse_.anchor_diag.size() == a.diag().size() &&
      reuse_.anchor_edges.size() == a.edges().size()) {
    double rho = 0;
    bool same = true;
    const auto& edges = a.edges();
    for (size_t k = 0; k < edges.size() && same; ++k) {
      const Triplet& e = edges[k];
      const Triplet& f = reuse_.anchor_edges[k];
      if (e.row != f.row || e.col != f.col) {
        same = false;
        break;
      }
      rho = std::max(rho, std::abs(std::log(e.value / f.value)));
    }
    if (same) {
      for (int i = 0; i < a.dim(); ++i) {
        const double s_new = a.slack(i), s_old = reuse_.anchor_slack[i];
        const double floor_new = 1e-12 * std::abs(a.diag(i));
        const double floor_old = 1e-12 * std::abs(reuse_.anchor_diag[i]);
        const bool tiny_new = s_new <= floor_new, tiny_old = s_old <= floor_old;
        if (tiny_new && tiny_old) continue;
        if (tiny_new != tiny_old || s_new <= 0 || s_old <= 0) {
          same = false;
          break;
        }
        rho = std::max(rho, std::abs(std::log(s_new / s_old)));
      }
    }
    if (same && rho <= reuse_.chain->eps0) {
      return {reuse_.chain, std::max(rho, 1e-15)};
    }
  }
  auto chain = std::make_shared<const SparsifierChain>(
      build_chain(a, options_.delta, options_.alpha));
  ++chains_built_;
  reuse_.chain = chain;
  reuse_.anchor_edges = a.edges();
  reuse_.anchor_diag = a.diag();
  reuse_.anchor_slack.resize(a.dim());
  for (int i = 0; i < a.dim(); ++i) reuse_.anchor_slack[i] = a.slack(i);
  return {chain, chain->eps0};
}

OracleResult ChainOracle::solve(const SddMatrix& a,
                                const Eigen::VectorXd& b) const {
  auto [chain, eps0] = chain_for(a);
  return optimize_chain(*chain, b, 1.0, eps0);
}

double ChainOracle::quality(const SddMatrix& a) const {
  return chain_for(a).first->quality();
}

void ChainOracle::refresh() const { reuse_ = Reuse{}; }

OracleResult ChainOracle::newton_subproblem(const SddMatrix& a,
                                            const Eigen::VectorXd& grad,
                                            double k_override) const {
  auto [chain, eps0] = chain_for(a);
  const double k = k_override > 0 ? k_override : chain->quality();
  const double e2 = std::exp(2.0);
  OracleResult res = optimize_chain(*chain, grad / k, e2 / (k * k), eps0);
  res.k = k;  // the step is z / k
  return res;
}

}  // namespace scalebal
