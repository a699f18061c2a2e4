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

#include "scalebal/matrix.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace scalebal {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

SparseNonnegativeMatrix::SparseNonnegativeMatrix(int dim,
                                                 std::vector<Triplet> triplets)
    : n_(dim) {
  if (dim <= 0) throw InvalidInputError("matrix dimension must be positive");
  std::map<std::pair<int, int>, double> merged;
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim) {
      throw InvalidInputError("entry (" + std::to_string(t.row + 1) + ", " +
                              std::to_string(t.col + 1) +
                              ") out of range for dimension " +
                              std::to_string(dim));
    }
    if (!std::isfinite(t.value)) throw InvalidInputError("non-finite entry");
    if (t.value < 0) {
      throw InvalidInputError("negative entry at (" +
                              std::to_string(t.row + 1) + ", " +
                              std::to_string(t.col + 1) + ")");
    }
    merged[{t.row, t.col}] += t.value;
  }
  row_ptr_.assign(n_ + 1, 0);
  col_ptr_.assign(n_ + 1, 0);
  for (const auto& [rc, v] : merged) {
    if (v == 0) continue;  // explicit zeros are not stored
    ++row_ptr_[rc.first + 1];
    ++col_ptr_[rc.second + 1];
  }
  for (int i = 0; i < n_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (int j = 0; j < n_; ++j) col_ptr_[j + 1] += col_ptr_[j];
  row_entries_.resize(row_ptr_[n_]);
  col_entries_.resize(col_ptr_[n_]);
  std::vector<int> rfill(row_ptr_.begin(), row_ptr_.end() - 1);
  std::vector<int> cfill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (const auto& [rc, v] : merged) {
    if (v == 0) continue;
    row_entries_[rfill[rc.first]++] = {rc.second, v};
    col_entries_[cfill[rc.second]++] = {rc.first, v};
  }
}

Eigen::VectorXd SparseNonnegativeMatrix::row_sums() const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < n_; ++i)
    for (const MatrixEntry& e : row(i)) r[i] += e.value;
  return r;
}

Eigen::VectorXd SparseNonnegativeMatrix::col_sums() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_);
  for (int j = 0; j < n_; ++j)
    for (const MatrixEntry& e : col(j)) c[j] += e.value;
  return c;
}

double SparseNonnegativeMatrix::at(int i, int j) const {
  for (const MatrixEntry& e : row(i))
    if (e.index == j) return e.value;
  return 0.0;
}

std::vector<Triplet> SparseNonnegativeMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (int i = 0; i < n_; ++i)
    for (const MatrixEntry& e : row(i)) out.push_back({i, e.index, e.value});
  return out;
}

Eigen::MatrixXd SparseNonnegativeMatrix::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (const MatrixEntry& e : row(i)) d(i, e.index) = e.value;
  return d;
}

MatrixStats matrix_stats(const SparseNonnegativeMatrix& a) {
  if (a.nnz() == 0) throw InvalidInputError("matrix has no entries");
  MatrixStats s;
  s.nnz = a.nnz();
  s.min_nonzero = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.dim(); ++i) {
    for (const MatrixEntry& e : a.row(i)) {
      s.entry_sum += e.value;
      s.min_nonzero = std::min(s.min_nonzero, e.value);
    }
  }
  s.ratio = s.entry_sum / s.min_nonzero;
  return s;
}

SparseNonnegativeMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  long line_no = 0;
  bool banner_checked = false;
  bool have_sizes = false;
  int n = 0, rows = 0, cols = 0;
  long declared_nnz = 0;
  std::vector<Triplet> triplets;
  while (std::getline(in, line)) {
    ++line_no;
    if (!banner_checked && line.rfind("%%MatrixMarket", 0) == 0) {
      banner_checked = true;
      std::istringstream hs(line.substr(2));
      std::string tag, object, format, field, symmetry;
      hs >> tag >> object >> format >> field >> symmetry;
      if (object != "matrix" || format != "coordinate" ||
          (field != "real" && field != "integer") || symmetry != "general") {
        throw ParseError("line 1: unsupported Matrix Market header '" + line +
                         "' (need matrix coordinate real general)");
      }
      continue;
    }
    if (!line.empty() && line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (!have_sizes) {
      if (!(ls >> rows >> cols >> declared_nnz)) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": malformed size line '" + line + "'");
      }
      if (rows != cols) {
        throw ParseError("line " + std::to_string(line_no) + ": matrix is " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         ", only square matrices are supported");
      }
      if (rows <= 0) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": dimension must be positive");
      }
      n = rows;
      have_sizes = true;
      continue;
    }
    long i, j;
    double v;
    if (!(ls >> i >> j >> v)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": malformed entry '" + line + "'");
    }
    if (i < 1 || i > n || j < 1 || j > n) {
      throw ParseError("line " + std::to_string(line_no) + ": index (" +
                       std::to_string(i) + ", " + std::to_string(j) +
                       ") out of range for dimension " + std::to_string(n));
    }
    if (v < 0) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": negative entry " + fmt(v));
    }
    triplets.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
  }
  if (!have_sizes) throw ParseError("'" + path + "': no size line found");
  if (declared_nnz != static_cast<long>(triplets.size())) {
    throw ParseError("'" + path + "': header declares " +
                     std::to_string(declared_nnz) + " entries, found " +
                     std::to_string(triplets.size()));
  }
  return SparseNonnegativeMatrix(n, std::move(triplets));
}

void save_matrix_market(const std::string& path,
                        const SparseNonnegativeMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.dim() << " " << a.dim() << " " << a.nnz() << "\n";
  out.precision(17);
  for (int i = 0; i < a.dim(); ++i)
    for (const MatrixEntry& e : a.row(i))
      out << (i + 1) << " " << (e.index + 1) << " " << e.value << "\n";
  if (!out) throw Error("write failed for '" + path + "'");
}

namespace {

SparseNonnegativeMatrix rescale(const SparseNonnegativeMatrix& a,
                                const Eigen::VectorXd& left_log,
                                const Eigen::VectorXd& right_log) {
  std::vector<Triplet> out;
  out.reserve(a.nnz());
  for (int i = 0; i < a.dim(); ++i) {
    for (const MatrixEntry& e : a.row(i)) {
      const double expo = std::log(e.value) + left_log[i] + right_log[e.index];
      if (!(std::abs(expo) <= kMaxExponent)) {
        throw NumericError("scaled entry (" + std::to_string(i + 1) + ", " +
                           std::to_string(e.index + 1) +
                           ") has log magnitude " + fmt(expo) +
                           " beyond the overflow guard");
      }
      out.push_back({i, e.index, std::exp(expo)});
    }
  }
  return SparseNonnegativeMatrix(a.dim(), std::move(out));
}

}  // namespace

SparseNonnegativeMatrix apply_scaling(const SparseNonnegativeMatrix& a,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y) {
  if (x.size() != a.dim() || y.size() != a.dim())
    throw InvalidInputError("factor length does not match matrix dimension");
  if (!x.allFinite() || !y.allFinite())
    throw InvalidInputError("non-finite scaling factors");
  return rescale(a, x, y);
}

SparseNonnegativeMatrix apply_balancing(const SparseNonnegativeMatrix& a,
                                        const Eigen::VectorXd& x) {
  if (x.size() != a.dim())
    throw InvalidInputError("factor length does not match matrix dimension");
  if (!x.allFinite()) throw InvalidInputError("non-finite balancing factors");
  return rescale(a, x, -x);
}

SccDecomposition scc_decompose(const SparseNonnegativeMatrix& a) {
  const int n = a.dim();
  SccDecomposition out;
  out.component_id.assign(n, -1);
  // Iterative Tarjan. Components complete in reverse topological order.
  std::vector<int> index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0;
  struct Frame {
    int v;
    size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      auto edges = a.row(f.v);
      if (f.child < edges.size()) {
        const int w = edges[f.child++].index;
        if (w == f.v) continue;  // self-loop
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[f.v] = std::min(lowlink[f.v], index[w]);
        }
      } else {
        if (lowlink[f.v] == index[f.v]) {
          std::vector<int> comp;
          while (true) {
            const int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
            if (w == f.v) break;
          }
          out.components.push_back(std::move(comp));
        }
        const int v = f.v;
        call.pop_back();
        if (!call.empty())
          lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[v]);
      }
    }
  }
  // Tarjan emits reverse topological order.
  std::reverse(out.components.begin(), out.components.end());
  for (size_t c = 0; c < out.components.size(); ++c)
    for (int v : out.components[c]) out.component_id[v] = static_cast<int>(c);
  out.is_strongly_connected = out.components.size() == 1;
  return out;
}

namespace {

// Dinic max-flow on small real-capacity networks.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n, -1) {}

  int add_edge(int u, int v, double cap) {
    const int id = static_cast<int>(to_.size());
    to_.push_back(v);
    cap_.push_back(cap);
    next_.push_back(head_[u]);
    head_[u] = id;
    to_.push_back(u);
    cap_.push_back(0.0);
    next_.push_back(head_[v]);
    head_[v] = id + 1;
    return id;
  }

  double flow_on(int id, double original_cap) const {
    return original_cap - cap_[id];
  }
  double residual(int id) const { return cap_[id]; }

  double run(int s, int t, double eps) {
    double total = 0;
    while (bfs(s, t, eps)) {
      iter_ = head_;
      double f;
      while ((f = dfs(s, t, std::numeric_limits<double>::infinity(), eps)) >
             eps)
        total += f;
    }
    return total;
  }

  // True if v is reachable from s in the residual graph.
  std::vector<bool> reachable(int s, double eps) const {
    std::vector<bool> seen(head_.size(), false);
    std::deque<int> q{s};
    seen[s] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int e = head_[u]; e != -1; e = next_[e]) {
        if (cap_[e] > eps && !seen[to_[e]]) {
          seen[to_[e]] = true;
          q.push_back(to_[e]);
        }
      }
    }
    return seen;
  }

 private:
  bool bfs(int s, int t, double eps) {
    level_.assign(head_.size(), -1);
    std::deque<int> q{s};
    level_[s] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int e = head_[u]; e != -1; e = next_[e]) {
        if (cap_[e] > eps && level_[to_[e]] == -1) {
          level_[to_[e]] = level_[u] + 1;
          q.push_back(to_[e]);
        }
      }
    }
    return level_[t] != -1;
  }

  double dfs(int u, int t, double pushed, double eps) {
    if (u == t) return pushed;
    for (int& e = iter_[u]; e != -1; e = next_[e]) {
      const int v = to_[e];
      if (cap_[e] > eps && level_[v] == level_[u] + 1) {
        const double f = dfs(v, t, std::min(pushed, cap_[e]), eps);
        if (f > eps) {
          cap_[e] -= f;
          cap_[e ^ 1] += f;
          return f;
        }
      }
    }
    return 0;
  }

  std::vector<int> head_, to_, next_, level_, iter_;
  std::vector<double> cap_;
};

}  // namespace

Scalability check_scalable(const SparseNonnegativeMatrix& a,
                           const Eigen::VectorXd& r,
                           const Eigen::VectorXd& c) {
  const int n = a.dim();
  if (r.size() != n || c.size() != n)
    throw InvalidInputError("target vector length does not match dimension");
  if (r.minCoeff() < 0 || c.minCoeff() < 0)
    throw InvalidInputError("targets must be nonnegative");
  const double total = r.sum();
  if (std::abs(total - c.sum()) > 1e-12 * std::max(1.0, total))
    throw InvalidInputError("sum of row targets differs from column targets");
  const double eps = 1e-12 * std::max(1.0, total);

  // Vertices: 0 = source, 1..n rows, n+1..2n columns, 2n+1 = sink.
  MaxFlow net(2 * n + 2);
  const int src = 0, snk = 2 * n + 1;
  for (int i = 0; i < n; ++i) net.add_edge(src, 1 + i, r[i]);
  for (int j = 0; j < n; ++j) net.add_edge(n + 1 + j, snk, c[j]);
  // Support edges between rows with positive supply and columns with
  // positive demand; other rows/columns are killed by zero factors. Edge
  // capacity `total` is as good as unbounded here.
  struct LiveEdge {
    int id;
    int tail;  // row vertex
    int head;  // column vertex
  };
  std::vector<LiveEdge> live;
  for (int i = 0; i < n; ++i) {
    for (const MatrixEntry& e : a.row(i)) {
      if (r[i] <= 0 || c[e.index] <= 0) continue;
      const int id = net.add_edge(1 + i, n + 1 + e.index, total);
      live.push_back({id, 1 + i, n + 1 + e.index});
    }
  }
  const double got = net.run(src, snk, eps);
  if (got < total - std::max(eps, 1e-10 * std::max(1.0, total)))
    return Scalability::kInfeasible;

  // Exact iff every live support edge can carry positive flow in some
  // feasible flow: either it already does, or a residual path from its head
  // back to its tail closes an augmenting cycle through it.
  for (const LiveEdge& le : live) {
    if (net.flow_on(le.id, total) > eps) continue;
    if (!net.reachable(le.head, eps)[le.tail]) return Scalability::kAlmost;
  }
  return Scalability::kExact;
}

double DiagonalFactors::kappa() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto* v : {&x, &y}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      lo = std::min(lo, (*v)[i]);
      hi = std::max(hi, (*v)[i]);
    }
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) return 1.0;
  return std::exp(std::min(hi - lo, kMaxExponent));
}

}  // namespace scalebal
