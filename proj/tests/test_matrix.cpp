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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "generators.hpp"
#include "scalebal/matrix.hpp"

using namespace scalebal;

namespace {

SparseNonnegativeMatrix mat2(double a11, double a12, double a21, double a22) {
  std::vector<Triplet> ts;
  if (a11 != 0) ts.push_back({0, 0, a11});
  if (a12 != 0) ts.push_back({0, 1, a12});
  if (a21 != 0) ts.push_back({1, 0, a21});
  if (a22 != 0) ts.push_back({1, 1, a22});
  return SparseNonnegativeMatrix(2, ts);
}

std::string write_temp(const std::string& body) {
  static int counter = 0;
  const std::string path =
      "test_matrix_tmp_" + std::to_string(counter++) + ".mtx";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("matrix market parsing") {
  SUBCASE("plain size line with entries") {
    const std::string p = write_temp("2 2 2\n1 2 4.0\n2 1 1.0\n");
    const SparseNonnegativeMatrix a = load_matrix_market(p);
    CHECK(a.dim() == 2);
    CHECK(a.nnz() == 2);
    CHECK(a.at(0, 1) == 4.0);
    CHECK(a.at(1, 0) == 1.0);
    CHECK(a.at(0, 0) == 0.0);
    std::remove(p.c_str());
  }
  SUBCASE("banner, comments, duplicates summed") {
    const std::string p = write_temp(
        "%%MatrixMarket matrix coordinate real general\n% comment\n"
        "2 2 3\n1 1 1.5\n1 1 0.5\n2 2 3.0\n");
    const SparseNonnegativeMatrix a = load_matrix_market(p);
    CHECK(a.nnz() == 2);
    CHECK(a.at(0, 0) == doctest::Approx(2.0));
    std::remove(p.c_str());
  }
  SUBCASE("explicit zero dropped from nnz") {
    const std::string p = write_temp("2 2 2\n1 1 0.0\n2 2 1.0\n");
    const SparseNonnegativeMatrix a = load_matrix_market(p);
    CHECK(a.nnz() == 1);
    std::remove(p.c_str());
  }
  SUBCASE("out of range index reports the line") {
    const std::string p = write_temp("2 2 1\n3 1 1.0\n");
    CHECK_THROWS_WITH_AS(load_matrix_market(p),
                         doctest::Contains("line 2"), ParseError);
    std::remove(p.c_str());
  }
  SUBCASE("negative entry rejected") {
    const std::string p = write_temp("2 2 1\n1 1 -2.0\n");
    CHECK_THROWS_AS(load_matrix_market(p), ParseError);
    std::remove(p.c_str());
  }
  SUBCASE("non-square rejected") {
    const std::string p = write_temp("2 3 1\n1 1 1.0\n");
    CHECK_THROWS_AS(load_matrix_market(p), ParseError);
    std::remove(p.c_str());
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_matrix_market("no_such_file.mtx"), ParseError);
  }
  SUBCASE("save and reload round trip") {
    const SparseNonnegativeMatrix a = mat2(0, 4, 1, 0);
    save_matrix_market("test_matrix_rt.mtx", a);
    const SparseNonnegativeMatrix b = load_matrix_market("test_matrix_rt.mtx");
    CHECK(b.at(0, 1) == 4.0);
    CHECK(b.at(1, 0) == 1.0);
    CHECK(b.nnz() == 2);
    std::remove("test_matrix_rt.mtx");
  }
}

TEST_CASE("matrix stats") {
  const SparseNonnegativeMatrix a = mat2(0, 4, 1, 0);
  const MatrixStats st = matrix_stats(a);
  CHECK(st.entry_sum == doctest::Approx(5.0));
  CHECK(st.min_nonzero == doctest::Approx(1.0));
  CHECK(st.ratio == doctest::Approx(5.0));
  CHECK(st.nnz == 2);

  const SparseNonnegativeMatrix ones = mat2(1, 1, 1, 1);
  CHECK(ones.row_sums().isApprox(Eigen::Vector2d(2, 2)));
  CHECK(ones.col_sums().isApprox(Eigen::Vector2d(2, 2)));

  const SparseNonnegativeMatrix single(1, {{0, 0, 2.0}});
  const MatrixStats st1 = matrix_stats(single);
  CHECK(st1.entry_sum == 2.0);
  CHECK(st1.min_nonzero == 2.0);
  CHECK(st1.ratio == 1.0);

  const SparseNonnegativeMatrix empty(2, {});
  CHECK_THROWS_AS(matrix_stats(empty), InvalidInputError);
}

TEST_CASE("apply scaling") {
  const SparseNonnegativeMatrix ones = mat2(1, 1, 1, 1);
  const Eigen::Vector2d zero(0, 0);
  SUBCASE("identity") {
    const SparseNonnegativeMatrix m = apply_scaling(ones, zero, zero);
    CHECK(m.at(0, 0) == 1.0);
    CHECK(m.at(1, 1) == 1.0);
  }
  SUBCASE("uniform quarter") {
    const Eigen::Vector2d l(-std::log(2.0), -std::log(2.0));
    const SparseNonnegativeMatrix m = apply_scaling(ones, l, l);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(m.at(i, j) == doctest::Approx(0.25));
  }
  SUBCASE("row doubling") {
    const SparseNonnegativeMatrix a = mat2(0, 4, 1, 0);
    const Eigen::Vector2d x(std::log(2.0), 0);
    const SparseNonnegativeMatrix m = apply_scaling(a, x, zero);
    CHECK(m.at(0, 1) == doctest::Approx(8.0));
    CHECK(m.at(1, 0) == doctest::Approx(1.0));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(apply_scaling(ones, Eigen::VectorXd::Zero(3), zero),
                    InvalidInputError);
  }
  SUBCASE("overflow guard") {
    Eigen::Vector2d huge(800.0, 800.0);
    CHECK_THROWS_AS(apply_scaling(ones, huge, zero), NumericError);
  }
}

TEST_CASE("apply balancing") {
  const SparseNonnegativeMatrix a = mat2(0, 4, 1, 0);
  SUBCASE("identity") {
    const SparseNonnegativeMatrix m =
        apply_balancing(a, Eigen::Vector2d(0, 0));
    CHECK(m.at(0, 1) == 4.0);
  }
  SUBCASE("closed form 2x2 balance") {
    const Eigen::Vector2d x(-std::log(2.0), 0);
    const SparseNonnegativeMatrix m = apply_balancing(a, x);
    CHECK(m.at(0, 1) == doctest::Approx(2.0));
    CHECK(m.at(1, 0) == doctest::Approx(2.0));
  }
  SUBCASE("translation invariance") {
    testing::Rng rng(7);
    const SparseNonnegativeMatrix g =
        testing::random_strongly_connected(rng, 6, 8);
    const Eigen::VectorXd x = testing::random_vector(rng, 6);
    const Eigen::VectorXd shifted = x.array() + 3.7;
    const SparseNonnegativeMatrix m1 = apply_balancing(g, x);
    const SparseNonnegativeMatrix m2 = apply_balancing(g, shifted);
    CHECK(m1.dense().isApprox(m2.dense(), 1e-12));
  }
  SUBCASE("support preserved for finite factors") {
    testing::Rng rng(13);
    for (int rep = 0; rep < 20; ++rep) {
      const SparseNonnegativeMatrix g =
          testing::random_strongly_connected(rng, 5, 6);
      const Eigen::VectorXd x = testing::random_vector(rng, 5, 2.0);
      const SparseNonnegativeMatrix m = apply_balancing(g, x);
      CHECK(m.nnz() == g.nnz());
    }
  }
}

namespace {

// Floyd-Warshall style mutual reachability.
std::vector<std::vector<bool>> reachability(const SparseNonnegativeMatrix& a) {
  const int n = a.dim();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    reach[i][i] = true;
    for (const MatrixEntry& e : a.row(i)) reach[i][e.index] = true;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  return reach;
}

}  // namespace

TEST_CASE("scc decomposition") {
  SUBCASE("two cycle") {
    const SccDecomposition d = scc_decompose(mat2(0, 4, 1, 0));
    CHECK(d.is_strongly_connected);
    CHECK(d.components.size() == 1);
  }
  SUBCASE("upper triangular") {
    const SccDecomposition d = scc_decompose(mat2(0, 1, 0, 0));
    CHECK_FALSE(d.is_strongly_connected);
    REQUIRE(d.components.size() == 2);
    // Edge 0 -> 1 must go from an earlier to a later component.
    CHECK(d.component_id[0] < d.component_id[1]);
  }
  SUBCASE("diagonal only") {
    std::vector<Triplet> ts;
    for (int i = 0; i < 4; ++i) ts.push_back({i, i, 1.0});
    const SccDecomposition d =
        scc_decompose(SparseNonnegativeMatrix(4, ts));
    CHECK(d.components.size() == 4);
  }
  SUBCASE("agrees with brute-force reachability, n <= 6") {
    testing::Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
      const int n = 2 + static_cast<int>(rng() % 5);
      std::vector<Triplet> ts;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (rng() % 3 == 0) ts.push_back({i, j, 1.0});
        }
      }
      const SparseNonnegativeMatrix a(n, ts);
      const SccDecomposition d = scc_decompose(a);
      const auto reach = reachability(a);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const bool same = d.component_id[i] == d.component_id[j];
          CHECK(same == (reach[i][j] && reach[j][i]));
          // Topological order respects edges.
          if (reach[i][j] && !same)
            CHECK(d.component_id[i] < d.component_id[j]);
        }
      }
    }
  }
}

namespace {

// Lemma-style zero-minor enumeration for n <= 5 (the test oracle).
Scalability scalcond_oracle(const SparseNonnegativeMatrix& a,
                            const Eigen::VectorXd& r,
                            const Eigen::VectorXd& c) {
  const int n = a.dim();
  bool exact = true;
  for (int zm = 0; zm < (1 << n); ++zm) {
    for (int lm = 0; lm < (1 << n); ++lm) {
      bool zero_minor = true;
      for (int i = 0; i < n && zero_minor; ++i) {
        if (!(zm >> i & 1)) continue;
        for (int j = 0; j < n; ++j) {
          if ((lm >> j & 1) && a.at(i, j) != 0) {
            zero_minor = false;
            break;
          }
        }
      }
      if (!zero_minor) continue;
      double lhs = 0, rhs = 0;
      for (int i = 0; i < n; ++i)
        if (!(zm >> i & 1)) lhs += r[i];
      for (int j = 0; j < n; ++j)
        if (lm >> j & 1) rhs += c[j];
      if (lhs < rhs - 1e-12) return Scalability::kInfeasible;
      if (std::abs(lhs - rhs) <= 1e-12) {
        // Equality requires the complement to be a zero minor too.
        bool comp_zero = true;
        for (int i = 0; i < n && comp_zero; ++i) {
          if (zm >> i & 1) continue;
          for (int j = 0; j < n; ++j) {
            if (!(lm >> j & 1) && a.at(i, j) != 0) {
              comp_zero = false;
              break;
            }
          }
        }
        if (!comp_zero) exact = false;
      }
    }
  }
  return exact ? Scalability::kExact : Scalability::kAlmost;
}

}  // namespace

TEST_CASE("check scalable") {
  const Eigen::Vector2d ones(1, 1);
  SUBCASE("identity pattern is exact") {
    CHECK(check_scalable(mat2(1, 0, 0, 1), ones, ones) ==
          Scalability::kExact);
  }
  SUBCASE("zero first column is infeasible") {
    CHECK(check_scalable(mat2(0, 1, 0, 1), ones, ones) ==
          Scalability::kInfeasible);
  }
  SUBCASE("triangular pattern is almost") {
    CHECK(check_scalable(mat2(1, 1, 0, 1), ones, ones) ==
          Scalability::kAlmost);
  }
  SUBCASE("mismatched sums throw") {
    CHECK_THROWS_AS(
        check_scalable(mat2(1, 0, 0, 1), ones, Eigen::Vector2d(1, 2)),
        InvalidInputError);
  }
  SUBCASE("zero-target rows reduce away") {
    CHECK(check_scalable(mat2(1, 0, 0, 1), Eigen::Vector2d(0, 1),
                         Eigen::Vector2d(0, 1)) == Scalability::kExact);
  }
  SUBCASE("agrees with zero-minor enumeration, n <= 5") {
    testing::Rng rng(23);
    int checked = 0;
    for (int rep = 0; rep < 400; ++rep) {
      const int n = 2 + static_cast<int>(rng() % 4);
      std::vector<Triplet> ts;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (rng() % 2 == 0) ts.push_back({i, j, 1.0 + (rng() % 5)});
      if (ts.empty()) continue;
      const SparseNonnegativeMatrix a(n, ts);
      const Eigen::VectorXd r = Eigen::VectorXd::Ones(n);
      const Eigen::VectorXd c = Eigen::VectorXd::Ones(n);
      CHECK(check_scalable(a, r, c) == scalcond_oracle(a, r, c));
      ++checked;
    }
    CHECK(checked > 300);
  }
}

TEST_CASE("diagonal factors kappa") {
  DiagonalFactors f;
  f.x = Eigen::Vector3d(0.0, std::log(2.0), -std::log(2.0));
  CHECK(f.kappa() == doctest::Approx(4.0));
  DiagonalFactors fs;
  fs.x = Eigen::Vector2d(0.0, 1.0);
  fs.y = Eigen::Vector2d(-1.0, 0.0);
  CHECK(fs.kappa() == doctest::Approx(std::exp(2.0)));
}
