/*
 * Copyright 2026 The pathdf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "pathdf/design.hpp"
#include "pathdf/lasso.hpp"
#include "pathdf/projection.hpp"

using Catch::Approx;
using namespace pathdf;

TEST_CASE("empty and single-coordinate projections") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, 3.0;
  REQUIRE(make_projection(xi, {}).apply(y).isZero());
  const Eigen::VectorXd kept = make_projection(xi, {1}).apply(y);
  REQUIRE(kept[0] == 0.0);
  REQUIRE(kept[1] == Approx(2.0));
  REQUIRE(kept[2] == 0.0);
}

TEST_CASE("proportional columns collapse to rank one") {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd x(6, 2);
  x.col(0) = oracles::random_vector(6, rng);
  x.col(1) = -0.5 * x.col(0);
  const auto proj = make_projection(x, {0, 1});
  REQUIRE(proj.rank == 1);
  REQUIRE(proj.rank == oracles::svd_rank(x));
}

TEST_CASE("projections are orthonormal, idempotent and symmetric") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = oracles::random_matrix(12, 8, rng);
  const auto proj = make_projection(x, {0, 3, 4, 6});
  REQUIRE((proj.basis.transpose() * proj.basis)
              .isApprox(Eigen::MatrixXd::Identity(proj.rank, proj.rank), 1e-10));
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd u = oracles::random_vector(12, rng);
    const Eigen::VectorXd v = oracles::random_vector(12, rng);
    const Eigen::VectorXd pu = proj.apply(u);
    REQUIRE((proj.apply(pu) - pu).norm() < 1e-10 * std::max(1.0, pu.norm()));
    REQUIRE(pu.dot(v) == Approx(u.dot(proj.apply(v))).margin(1e-10));
    // Pythagoras
    REQUIRE(u.squaredNorm() ==
            Approx(pu.squaredNorm() + (u - pu).squaredNorm()).epsilon(1e-8));
  }
}

TEST_CASE("refits along the path hard-threshold on the identity design") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(10, 10);
  std::mt19937_64 rng(9);
  const Eigen::VectorXd y = 2.0 * oracles::random_vector(10, rng);
  const LassoPath path = compute_path(xi, y, GridSpec{25});
  const auto fits = lasso_ols_fit(xi, y, path);
  for (std::size_t k = 0; k < path.size(); ++k)
    for (int i = 0; i < 10; ++i) {
      const double expected = std::abs(y[i]) > path.lambdas[k] ? y[i] : 0.0;
      REQUIRE(fits[k][i] == expected);  // exact: identity basis
    }
}

TEST_CASE("refit equals full least squares once everything is selected") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd x = oracles::random_matrix(10, 5, rng);
  Eigen::VectorXd y = x * Eigen::VectorXd::Ones(5) + 0.1 * oracles::random_vector(10, rng);
  const LassoPath path = compute_path(x, y, GridSpec{60, 1e-5});
  const auto fits = lasso_ols_fit(x, y, path);
  const Eigen::VectorXd ols =
      x * (x.transpose() * x).ldlt().solve(x.transpose() * y);  // normal equations oracle
  REQUIRE(path.active_sets.back().size() == 5);
  REQUIRE((fits.back() - ols).norm() < 1e-8 * y.norm());
  // residual orthogonal to the selected span
  for (std::size_t k = 0; k < path.size(); ++k)
    for (int j : path.active_sets[k])
      REQUIRE(std::abs(x.col(j).dot(y - fits[k])) < 1e-8 * y.squaredNorm());
  // at the top of the path nothing is selected
  REQUIRE(fits.front().isZero());
}

TEST_CASE("incremental refits match one-shot projections across set changes") {
  std::mt19937_64 rng(15);
  const Eigen::MatrixXd x = oracles::random_matrix(15, 9, rng);
  const Eigen::VectorXd y = oracles::random_vector(15, rng);
  CholeskyRefit refit(x, y);
  const std::vector<std::vector<int>> sets = {
      {2}, {2, 5}, {1, 2, 5, 7}, {1, 2, 3, 5, 7, 8}, {0, 4}, {0, 4, 6}, {}};
  for (const auto& a : sets) {
    refit.prepare(a);
    const Eigen::VectorXd via_engine = refit.fitted();
    const Eigen::VectorXd via_svd = oracles::project_svd(x, a, y);
    REQUIRE((via_engine - via_svd).norm() < 1e-9 * std::max(1.0, y.norm()));
    REQUIRE(refit.rank() == oracles::svd_rank(oracles::columns(x, a)));
  }
}

TEST_CASE("incremental refit skips dependent columns") {
  std::mt19937_64 rng(19);
  Eigen::MatrixXd x(8, 3);
  x.col(0) = oracles::random_vector(8, rng);
  x.col(1) = 3.0 * x.col(0);
  x.col(2) = oracles::random_vector(8, rng);
  const Eigen::VectorXd y = oracles::random_vector(8, rng);
  CholeskyRefit refit(x, y);
  refit.prepare({0, 1, 2});
  REQUIRE(refit.rank() == 2);
  const Eigen::VectorXd coef = refit.coefficients();
  REQUIRE(coef.size() == 3);
  REQUIRE(coef[1] == 0.0);
  REQUIRE((refit.fitted() - oracles::project_svd(x, {0, 2}, y)).norm() < 1e-9);
}

TEST_CASE("oracle least-squares risk") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(100, 100);
  const Eigen::VectorXd beta = build_beta({1.0, 0.1}, 100, 100);
  REQUIRE(oracle_ols_risk(xi, beta, 0.5) == Approx(2.5));
  REQUIRE(oracle_ols_risk(xi, Eigen::VectorXd::Zero(100), 0.5) == 0.0);

  std::mt19937_64 rng(21);
  Eigen::MatrixXd dup(10, 4);
  dup.col(0) = oracles::random_vector(10, rng);
  dup.col(1) = dup.col(0);
  dup.col(2) = oracles::random_vector(10, rng);
  dup.col(3) = oracles::random_vector(10, rng);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4);
  b[0] = b[1] = b[2] = 1.0;  // support of size 3, rank 2
  REQUIRE(oracle_ols_risk(dup, b, 1.0) == Approx(2.0));
}
