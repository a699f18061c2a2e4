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

#include "scalebal/sdd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace scalebal {

SddMatrix::SddMatrix(Eigen::VectorXd diag, std::vector<Triplet> edges)
    : diag_(std::move(diag)) {
  const int n = dim();
  if (n == 0) throw InvalidInputError("SDD matrix must be nonempty");
  std::map<std::pair<int, int>, double> merged;
  for (const Triplet& e : edges) {
    if (e.row == e.col)
      throw InvalidInputError("diagonal entries belong in the diag vector");
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n)
      throw InvalidInputError("edge index out of range");
    if (!(e.value >= 0))
      throw InvalidInputError("edge weights must be nonnegative");
    const int a = std::min(e.row, e.col), b = std::max(e.row, e.col);
    merged[{a, b}] += e.value;
  }
  weights_.reserve(merged.size());
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (const auto& [ab, w] : merged) {
    if (w == 0) continue;
    weights_.push_back({ab.first, ab.second, w});
    degree[ab.first] += w;
    degree[ab.second] += w;
  }
  for (int i = 0; i < n; ++i) {
    if (diag_[i] < degree[i] - 1e-9 * std::abs(diag_[i]) - 1e-300) {
      throw InvalidInputError(
          "matrix is not diagonally dominant at row " + std::to_string(i) +
          " (diag " + std::to_string(diag_[i]) + " < weighted degree " +
          std::to_string(degree[i]) + ")");
    }
  }
  adj_ptr_.assign(n + 1, 0);
  for (const Triplet& e : weights_) {
    ++adj_ptr_[e.row + 1];
    ++adj_ptr_[e.col + 1];
  }
  for (int i = 0; i < n; ++i) adj_ptr_[i + 1] += adj_ptr_[i];
  adj_.resize(adj_ptr_[n]);
  std::vector<int> fill(adj_ptr_.begin(), adj_ptr_.end() - 1);
  for (const Triplet& e : weights_) {
    adj_[fill[e.row]++] = {e.col, e.value};
    adj_[fill[e.col]++] = {e.row, e.value};
  }
}

double SddMatrix::slack(int i) const {
  double deg = 0;
  for (const MatrixEntry& e : neighbors(i)) deg += e.value;
  return diag_[i] - deg;
}

Eigen::VectorXd SddMatrix::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = diag_.cwiseProduct(x);
  for (const Triplet& e : weights_) {
    y[e.row] -= e.value * x[e.col];
    y[e.col] -= e.value * x[e.row];
  }
  return y;
}

double SddMatrix::quad(const Eigen::VectorXd& x) const {
  double q = diag_.cwiseProduct(x).dot(x);
  for (const Triplet& e : weights_) q -= 2 * e.value * x[e.row] * x[e.col];
  return q;
}

SddMatrix SddMatrix::scaled(double s) const {
  if (!(s > 0)) throw InvalidInputError("scale must be positive");
  std::vector<Triplet> edges = weights_;
  for (Triplet& e : edges) e.value *= s;
  return SddMatrix(diag_ * s, std::move(edges));
}

SddMatrix SddMatrix::submatrix(const std::vector<int>& idx) const {
  std::vector<int> pos(dim(), -1);
  for (size_t k = 0; k < idx.size(); ++k) pos[idx[k]] = static_cast<int>(k);
  Eigen::VectorXd d(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) d[k] = diag_[idx[k]];
  std::vector<Triplet> edges;
  for (const Triplet& e : weights_) {
    if (pos[e.row] >= 0 && pos[e.col] >= 0)
      edges.push_back({pos[e.row], pos[e.col], e.value});
  }
  return SddMatrix(std::move(d), std::move(edges));
}

Eigen::MatrixXd SddMatrix::dense() const {
  Eigen::MatrixXd m = diag_.asDiagonal();
  for (const Triplet& e : weights_) {
    m(e.row, e.col) -= e.value;
    m(e.col, e.row) -= e.value;
  }
  return m;
}

Eigen::SparseMatrix<double> SddMatrix::sparse() const {
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(weights_.size() * 2 + dim());
  for (int i = 0; i < dim(); ++i) ts.emplace_back(i, i, diag_[i]);
  for (const Triplet& e : weights_) {
    ts.emplace_back(e.row, e.col, -e.value);
    ts.emplace_back(e.col, e.row, -e.value);
  }
  Eigen::SparseMatrix<double> s(dim(), dim());
  s.setFromTriplets(ts.begin(), ts.end());
  return s;
}

std::vector<int> complement_of(const std::vector<int>& f, int n) {
  std::vector<bool> in_f(n, false);
  for (int v : f) in_f[v] = true;
  std::vector<int> c;
  c.reserve(n - f.size());
  for (int v = 0; v < n; ++v)
    if (!in_f[v]) c.push_back(v);
  return c;
}

SddMatrix schur_complement(const SddMatrix& m, const std::vector<int>& f) {
  const int n = m.dim();
  if (f.empty()) throw InvalidInputError("F must be nonempty");
  std::vector<bool> in_f(n, false);
  for (int v : f) {
    if (v < 0 || v >= n) throw InvalidInputError("F index out of range");
    in_f[v] = true;
  }
  if (static_cast<int>(f.size()) == n)
    throw InvalidInputError("F must leave at least one vertex");

  // Working copy as adjacency maps; eliminate F pivots in min-degree order.
  std::vector<double> diag(m.diag().data(), m.diag().data() + n);
  std::vector<std::map<int, double>> w(n);
  for (const Triplet& e : m.edges()) {
    w[e.row][e.col] += e.value;
    w[e.col][e.row] += e.value;
  }
  std::set<std::pair<int, int>> queue;  // (degree, vertex), F only
  for (int v : f) queue.insert({static_cast<int>(w[v].size()), v});
  auto requeue = [&](int v, int old_deg) {
    if (!in_f[v]) return;
    queue.erase({old_deg, v});
    queue.insert({static_cast<int>(w[v].size()), v});
  };
  while (!queue.empty()) {
    const int v = queue.begin()->second;
    queue.erase(queue.begin());
    const double pivot = diag[v];
    if (!(pivot > 0)) {
      throw NumericError("singular pivot while eliminating vertex " +
                         std::to_string(v));
    }
    std::vector<std::pair<int, double>> nbrs(w[v].begin(), w[v].end());
    for (const auto& [u, wu] : nbrs) {
      const int old_deg_u = static_cast<int>(w[u].size());
      w[u].erase(v);
      diag[u] -= wu * wu / pivot;
      for (const auto& [z, wz] : nbrs) {
        if (z <= u) continue;
        const int old_deg_z = static_cast<int>(w[z].size());
        w[u][z] += wu * wz / pivot;
        w[z][u] += wu * wz / pivot;
        requeue(z, old_deg_z);
      }
      requeue(u, old_deg_u);
    }
    w[v].clear();
  }

  const std::vector<int> c = complement_of(f, n);
  std::vector<int> pos(n, -1);
  for (size_t k = 0; k < c.size(); ++k) pos[c[k]] = static_cast<int>(k);
  Eigen::VectorXd d(c.size());
  for (size_t k = 0; k < c.size(); ++k) d[k] = diag[c[k]];
  std::vector<Triplet> edges;
  for (int u : c) {
    for (const auto& [z, wz] : w[u]) {
      if (z > u) edges.push_back({pos[u], pos[z], wz});
    }
  }
  return SddMatrix(std::move(d), std::move(edges));
}

}  // namespace scalebal
