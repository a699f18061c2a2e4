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

#include <Eigen/Dense>

#include "generators.hpp"
#include "scalebal/sdd.hpp"

using namespace scalebal;

namespace {

// Dense Schur complement by explicit block inversion.
Eigen::MatrixXd dense_schur(const Eigen::MatrixXd& m,
                            const std::vector<int>& f,
                            const std::vector<int>& c) {
  const int nf = static_cast<int>(f.size()), nc = static_cast<int>(c.size());
  Eigen::MatrixXd mff(nf, nf), mfc(nf, nc), mcc(nc, nc);
  for (int p = 0; p < nf; ++p) {
    for (int q = 0; q < nf; ++q) mff(p, q) = m(f[p], f[q]);
    for (int q = 0; q < nc; ++q) mfc(p, q) = m(f[p], c[q]);
  }
  for (int p = 0; p < nc; ++p)
    for (int q = 0; q < nc; ++q) mcc(p, q) = m(c[p], c[q]);
  return mcc - mfc.transpose() * mff.inverse() * mfc;
}

}  // namespace

TEST_CASE("sdd construction and accessors") {
  SddMatrix m(Eigen::Vector2d(2, 2), {{0, 1, 1.0}});
  CHECK(m.diag(0) == 2.0);
  CHECK(m.slack(0) == doctest::Approx(1.0));
  CHECK(m.neighbors(0).size() == 1);
  CHECK(m.neighbors(0)[0].index == 1);
  CHECK(m.neighbors(0)[0].value == 1.0);

  Eigen::MatrixXd d = m.dense();
  CHECK(d(0, 1) == -1.0);
  CHECK(d(1, 0) == -1.0);

  SUBCASE("dominance violation detected") {
    CHECK_THROWS_AS(SddMatrix(Eigen::Vector2d(0.5, 2), {{0, 1, 1.0}}),
                    InvalidInputError);
  }
  SUBCASE("negative weight rejected") {
    CHECK_THROWS_AS(SddMatrix(Eigen::Vector2d(2, 2), {{0, 1, -1.0}}),
                    InvalidInputError);
  }
  SUBCASE("apply and quad match dense") {
    testing::Rng rng(3);
    for (int rep = 0; rep < 25; ++rep) {
      const SddMatrix s = testing::random_sdd(rng, 7, 10);
      const Eigen::MatrixXd dd = s.dense();
      const Eigen::VectorXd x = testing::random_vector(rng, 7);
      CHECK((s.apply(x) - dd * x).norm() < 1e-10 * (1 + x.norm()));
      CHECK(s.quad(x) == doctest::Approx(x.dot(dd * x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("schur complement") {
  SUBCASE("2x2 closed form") {
    SddMatrix m(Eigen::Vector2d(2, 2), {{0, 1, 1.0}});
    const SddMatrix sc = schur_complement(m, {0});
    CHECK(sc.dim() == 1);
    CHECK(sc.diag(0) == doctest::Approx(1.5));
  }
  SUBCASE("block diagonal leaves the other block alone") {
    // Two 2x2 blocks: {0,1} and {2,3}.
    SddMatrix m(Eigen::Vector4d(2, 2, 3, 3),
                {{0, 1, 1.0}, {2, 3, 1.5}});
    const SddMatrix sc = schur_complement(m, {0});
    CHECK(sc.dim() == 3);
    // C order is (1, 2, 3); the second block is untouched.
    CHECK(sc.diag(0) == doctest::Approx(1.5));
    CHECK(sc.diag(1) == doctest::Approx(3.0));
    CHECK(sc.diag(2) == doctest::Approx(3.0));
    CHECK(sc.dense()(1, 2) == doctest::Approx(-1.5));
  }
  SUBCASE("matches dense elimination oracle on random 8x8") {
    testing::Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
      const SddMatrix m = testing::random_sdd(rng, 8, 12);
      std::vector<int> f;
      for (int i = 0; i < 8; ++i)
        if (rng() % 2 == 0) f.push_back(i);
      if (f.empty() || f.size() == 8) continue;
      const std::vector<int> c = complement_of(f, 8);
      const SddMatrix sc = schur_complement(m, f);
      const Eigen::MatrixXd expected = dense_schur(m.dense(), f, c);
      CHECK((sc.dense() - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("result stays in class") {
    testing::Rng rng(29);
    for (int rep = 0; rep < 30; ++rep) {
      const SddMatrix m = testing::random_sdd(rng, 9, 14, rep % 2 == 0);
      std::vector<int> f{0, 3, 5};
      // Construction re-checks dominance and sign structure.
      CHECK_NOTHROW(schur_complement(m, f));
    }
  }
  SUBCASE("eliminating everything is rejected") {
    SddMatrix m(Eigen::Vector2d(2, 2), {{0, 1, 1.0}});
    CHECK_THROWS_AS(schur_complement(m, {0, 1}), InvalidInputError);
  }
}

TEST_CASE("submatrix and scaling") {
  testing::Rng rng(31);
  const SddMatrix m = testing::random_sdd(rng, 6, 8);
  const std::vector<int> idx{1, 3, 4};
  const SddMatrix sub = m.submatrix(idx);
  const Eigen::MatrixXd dense = m.dense();
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q)
      CHECK(sub.dense()(p, q) == doctest::Approx(dense(idx[p], idx[q])));

  const SddMatrix scaled = m.scaled(2.5);
  CHECK((scaled.dense() - 2.5 * dense).cwiseAbs().maxCoeff() < 1e-12);
}
