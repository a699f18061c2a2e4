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
//
// Independent dense oracles used by the test suites; nothing here touches
// the implementation paths it checks.

#ifndef SCALEBAL_TESTS_DENSE_ORACLES_HPP_
#define SCALEBAL_TESTS_DENSE_ORACLES_HPP_

#include <functional>

#include <Eigen/Dense>

#include "scalebal/sdd.hpp"

namespace scalebal::testing {

// min eigenvalue of the symmetric part of (B - A); psd_within(A, B, tol)
// checks A <= B up to tol relative to the scale of B.
inline bool psd_leq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    double tol) {
  const Eigen::MatrixXd diff = b - a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
  const double scale =
      std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

// e^{-eps} B <= A <= e^{eps} B.
inline bool spectral_sandwich(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b, double eps,
                              double tol) {
  return psd_leq(std::exp(-eps) * b, a, tol) &&
         psd_leq(a, std::exp(eps) * b, tol);
}

// Energy-minimizing voltage extension of x_hat on C to all vertices:
// x_F = -M_FF^{-1} M_FC x_hat.
inline Eigen::VectorXd dense_extension(const SddMatrix& m,
                                       const std::vector<int>& f,
                                       const std::vector<int>& c,
                                       const Eigen::VectorXd& x_hat) {
  const Eigen::MatrixXd full = m.dense();
  const int nf = static_cast<int>(f.size());
  Eigen::MatrixXd mff(nf, nf);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  for (int p = 0; p < nf; ++p) {
    for (int q = 0; q < nf; ++q) mff(p, q) = full(f[p], f[q]);
    for (size_t k = 0; k < c.size(); ++k)
      rhs[p] -= full(f[p], c[k]) * x_hat[k];
  }
  const Eigen::VectorXd xf = mff.ldlt().solve(rhs);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.dim());
  for (size_t k = 0; k < c.size(); ++k) out[c[k]] = x_hat[k];
  for (int p = 0; p < nf; ++p) out[f[p]] = xf[p];
  return out;
}

// Central finite differences of a scalar function.
inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double fp = fn(p);
    p[i] = x[i] - h;
    const double fm = fn(p);
    p[i] = x[i];
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

// Central finite differences of a gradient map applied to direction v.
inline Eigen::VectorXd fd_hessian_vec(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h = 1e-5) {
  return (grad(x + h * v) - grad(x - h * v)) / (2 * h);
}

// Linear least-squares fit y ~ a + b x; returns (slope, r_squared).
inline std::pair<double, double> linear_fit(const std::vector<double>& xs,
                                            const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (int i = 0; i < n; ++i) {
    const double pred = intercept + slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return {slope, r2};
}

}  // namespace scalebal::testing

#endif  // SCALEBAL_TESTS_DENSE_ORACLES_HPP_
