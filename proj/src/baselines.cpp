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

#include "scalebal/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "scalebal/objectives.hpp"

namespace scalebal {

namespace {

// Row and column sums of D(exp(x)) A D(exp(y)) without forming the matrix.
void scaled_sums(const SparseNonnegativeMatrix& a, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& y, Eigen::VectorXd* rm,
                 Eigen::VectorXd* cm) {
  rm->setZero(a.dim());
  cm->setZero(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    for (const MatrixEntry& e : a.row(i)) {
      const double expo = std::log(e.value) + x[i] + y[e.index];
      if (!(std::abs(expo) <= kMaxExponent))
        throw NumericError("sinkhorn factors overflowed the exponent guard");
      const double m = std::exp(expo);
      (*rm)[i] += m;
      (*cm)[e.index] += m;
    }
  }
}

}  // namespace

DiagonalFactorsResult sinkhorn(const SparseNonnegativeMatrix& a,
                               const Eigen::VectorXd& r,
                               const Eigen::VectorXd& c,
                               const BaselineConfig& cfg) {
  const int n = a.dim();
  if (r.size() != n || c.size() != n)
    throw InvalidInputError("target length does not match dimension");
  if (r.minCoeff() <= 0 || c.minCoeff() <= 0)
    throw InvalidInputError("sinkhorn requires strictly positive targets");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), y = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd rm(n), cm(n);
  DiagonalFactorsResult out;
  out.status = SolveStatus::kCapExceeded;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    scaled_sums(a, x, y, &rm, &cm);
    for (int i = 0; i < n; ++i) {
      if (rm[i] <= 0)
        throw NumericError("zero row sum at row " + std::to_string(i + 1) +
                           "; instance is not scalable");
      x[i] += std::log(r[i] / rm[i]);
    }
    scaled_sums(a, x, y, &rm, &cm);
    for (int j = 0; j < n; ++j) {
      if (cm[j] <= 0)
        throw NumericError("zero column sum at column " +
                           std::to_string(j + 1) +
                           "; instance is not scalable");
      y[j] += std::log(c[j] / cm[j]);
    }
    scaled_sums(a, x, y, &rm, &cm);
    const double err = (rm - r).squaredNorm() + (cm - c).squaredNorm();
    out.iterations = sweep;
    out.trace.records.push_back(
        {sweep, rm.sum(), 0.0, err, 0.0, 0.0, 0.0});
    if (err <= cfg.target_error) {
      out.status = SolveStatus::kConverged;
      break;
    }
  }
  out.factors.x = x;
  out.factors.y = y;
  out.kappa = out.factors.kappa();
  scaled_sums(a, x, y, &rm, &cm);
  out.error = (rm - r).squaredNorm() + (cm - c).squaredNorm();
  out.objective = rm.sum() - r.dot(x) - c.dot(y);
  return out;
}

DiagonalFactorsResult osborne(const SparseNonnegativeMatrix& a,
                              const BaselineConfig& cfg) {
  const int n = a.dim();
  if (!scc_decompose(a).is_strongly_connected)
    throw InvalidInputError("osborne requires a strongly connected matrix");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  DiagonalFactorsResult out;
  out.status = SolveStatus::kCapExceeded;

  // Off-diagonal row/col sums of the current balanced matrix at coordinate i.
  auto coord_sums = [&](int i) {
    double rs = 0, cs = 0;
    for (const MatrixEntry& e : a.row(i))
      if (e.index != i) rs += e.value * std::exp(x[i] - x[e.index]);
    for (const MatrixEntry& e : a.col(i))
      if (e.index != i) cs += e.value * std::exp(x[e.index] - x[i]);
    return std::pair<double, double>(rs, cs);
  };
  auto update = [&](int i) {
    const auto [rs, cs] = coord_sums(i);
    if (n > 1 && (!(rs > 0) || !(cs > 0)))
      throw NumericError("vertex " + std::to_string(i + 1) +
                         " has empty in- or out-neighborhood");
    if (rs > 0 && cs > 0) x[i] += 0.5 * std::log(cs / rs);
  };

  long updates = 0;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    if (cfg.order == BaselineConfig::Order::kCyclic) {
      for (int i = 0; i < n; ++i) {
        update(i);
        ++updates;
      }
    } else {
      for (int rep = 0; rep < n; ++rep) {
        int best = 0;
        double best_gap = -1;
        for (int i = 0; i < n; ++i) {
          const auto [rs, cs] = coord_sums(i);
          const double gap =
              (rs > 0 && cs > 0) ? std::abs(std::log(cs / rs)) : 0.0;
          if (gap > best_gap) {
            best_gap = gap;
            best = i;
          }
        }
        update(best);
        ++updates;
      }
    }
    const SparseNonnegativeMatrix m = apply_balancing(a, x);
    const double err = balancing_error(m);
    const double value = m.row_sums().sum();
    out.iterations = updates;
    out.trace.records.push_back({updates, value, 0.0, err, 0.0, 0.0, 0.0});
    if (err <= cfg.target_error) {
      out.status = SolveStatus::kConverged;
      break;
    }
  }
  out.factors.x = x;
  out.kappa = out.factors.kappa();
  const SparseNonnegativeMatrix m = apply_balancing(a, x);
  out.error = balancing_error(m);
  out.objective = m.row_sums().sum();
  return out;
}

BoxQpSolution brute_force_oracle(const SddMatrix& m, const Eigen::VectorXd& b,
                                 double box) {
  const int n = m.dim();
  if (n > 12) throw InvalidInputError("brute force oracle limited to n <= 12");
  if (b.size() != n) throw InvalidInputError("rhs size mismatch");
  const Eigen::MatrixXd dense = m.dense();
  const auto value = [&](const Eigen::VectorXd& z) {
    return 0.5 * z.dot(dense * z) + b.dot(z);
  };
  BoxQpSolution best;
  best.z = Eigen::VectorXd::Zero(n);
  best.value = 0;
  std::vector<int> pattern(n, 0);  // 0 free, 1 at +box, 2 at -box
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long rest = code;
    std::vector<int> free_idx;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      pattern[i] = rest % 3;
      rest /= 3;
      if (pattern[i] == 0)
        free_idx.push_back(i);
      else
        z[i] = pattern[i] == 1 ? box : -box;
    }
    if (!free_idx.empty()) {
      // Stationarity on the free block: M_ff z_f = -(b_f + M_fp z_p).
      const int nf = static_cast<int>(free_idx.size());
      Eigen::MatrixXd mf(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int p = 0; p < nf; ++p) {
        rhs[p] = -b[free_idx[p]];
        for (int q = 0; q < nf; ++q)
          mf(p, q) = dense(free_idx[p], free_idx[q]);
        for (int j = 0; j < n; ++j) {
          if (pattern[j] != 0) rhs[p] -= dense(free_idx[p], j) * z[j];
        }
      }
      const Eigen::VectorXd zf =
          mf.completeOrthogonalDecomposition().solve(rhs);
      // Inconsistent stationarity means the face minimum lives on a
      // boundary face handled by another pattern.
      if ((mf * zf - rhs).norm() > 1e-9 * (1 + rhs.norm())) continue;
      bool feasible = true;
      for (int p = 0; p < nf; ++p) {
        if (std::abs(zf[p]) > box + 1e-12) {
          feasible = false;
          break;
        }
        z[free_idx[p]] = zf[p];
      }
      if (!feasible) continue;
    }
    const double v = value(z);
    if (v < best.value) {
      best.value = v;
      best.z = z;
    }
  }
  return best;
}

OracleResult BruteForceKOracle::solve(const SddMatrix& a,
                                      const Eigen::VectorXd& b) const {
  const BoxQpSolution sol = brute_force_oracle(a, b, 1.0);
  OracleResult res;
  res.z = sol.z;
  res.value = sol.value;
  res.k = 1.0;
  res.depth = 0;
  return res;
}

}  // namespace scalebal
