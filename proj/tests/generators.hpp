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

#ifndef SCALEBAL_TESTS_GENERATORS_HPP_
#define SCALEBAL_TESTS_GENERATORS_HPP_

#include <random>
#include <set>
#include <vector>

#include "scalebal/matrix.hpp"
#include "scalebal/sdd.hpp"

namespace scalebal::testing {

using Rng = std::mt19937_64;

inline double log_uniform(Rng& rng, double lo_log10, double hi_log10) {
  std::uniform_real_distribution<double> u(lo_log10, hi_log10);
  return std::pow(10.0, u(rng));
}

// Strongly connected: a random cycle through all vertices plus extra edges.
inline SparseNonnegativeMatrix random_strongly_connected(Rng& rng, int n,
                                                         int extra_edges,
                                                         double lo = -2,
                                                         double hi = 2) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<std::pair<int, int>> used;
  std::vector<Triplet> ts;
  for (int i = 0; i < n; ++i) {
    const int u = perm[i], v = perm[(i + 1) % n];
    if (u == v) continue;
    used.insert({u, v});
    ts.push_back({u, v, log_uniform(rng, lo, hi)});
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int e = 0; e < extra_edges; ++e) {
    const int u = pick(rng), v = pick(rng);
    if (u == v || used.count({u, v})) continue;
    used.insert({u, v});
    ts.push_back({u, v, log_uniform(rng, lo, hi)});
  }
  return SparseNonnegativeMatrix(n, std::move(ts));
}

// Support contains a permutation, hence almost (1,1)-scalable.
inline SparseNonnegativeMatrix random_scalable(Rng& rng, int n,
                                               int extra_edges,
                                               double lo = -2, double hi = 2) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<std::pair<int, int>> used;
  std::vector<Triplet> ts;
  for (int i = 0; i < n; ++i) {
    used.insert({i, perm[i]});
    ts.push_back({i, perm[i], log_uniform(rng, lo, hi)});
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int e = 0; e < extra_edges; ++e) {
    const int u = pick(rng), v = pick(rng);
    if (used.count({u, v})) continue;
    used.insert({u, v});
    ts.push_back({u, v, log_uniform(rng, lo, hi)});
  }
  return SparseNonnegativeMatrix(n, std::move(ts));
}

inline SparseNonnegativeMatrix random_positive(Rng& rng, int n, double lo = -2,
                                               double hi = 2) {
  std::vector<Triplet> ts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ts.push_back({i, j, log_uniform(rng, lo, hi)});
  return SparseNonnegativeMatrix(n, std::move(ts));
}

// Random SDD matrix: random graph weights plus nonnegative diagonal slack.
// With `laplacian` the slack is zero except one anchored vertex.
inline SddMatrix random_sdd(Rng& rng, int n, int edges, bool laplacian = false,
                            double lo = -1, double hi = 1) {
  std::set<std::pair<int, int>> used;
  std::vector<Triplet> ts;
  std::uniform_int_distribution<int> pick(0, n - 1);
  // A spanning path keeps things connected.
  for (int i = 0; i + 1 < n; ++i) {
    used.insert({i, i + 1});
    ts.push_back({i, i + 1, log_uniform(rng, lo, hi)});
  }
  for (int e = 0; e < edges; ++e) {
    int u = pick(rng), v = pick(rng);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (used.count({u, v})) continue;
    used.insert({u, v});
    ts.push_back({u, v, log_uniform(rng, lo, hi)});
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (const Triplet& t : ts) {
    diag[t.row] += t.value;
    diag[t.col] += t.value;
  }
  if (laplacian) {
    diag[pick(rng)] += log_uniform(rng, lo, hi);
  } else {
    for (int i = 0; i < n; ++i) diag[i] += log_uniform(rng, lo - 1, hi);
  }
  return SddMatrix(std::move(diag), std::move(ts));
}

inline Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

}  // namespace scalebal::testing

#endif  // SCALEBAL_TESTS_GENERATORS_HPP_
