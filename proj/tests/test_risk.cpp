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
#include "pathdf/dof.hpp"
#include "pathdf/lasso.hpp"
#include "pathdf/risk.hpp"
#include "pathdf/stats.hpp"

using Catch::Approx;
using namespace pathdf;

namespace {

struct Pipeline {
  LassoPath path;
  std::vector<Eigen::VectorXd> fits;
  DfEstimate df;
};

Pipeline run_pipeline(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GridSpec& grid) {
  Pipeline out;
  out.path = compute_path(x, y, grid);
  out.fits = lasso_ols_fit(x, y, out.path);
  out.df = estimate_df(out.path, DfMethod::LassoOLS);
  return out;
}

}  // namespace

TEST_CASE("above the path top every estimate is the null-model value") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(10, 10);
  std::mt19937_64 rng(1);
  const Eigen::VectorXd y = oracles::random_vector(10, rng);
  GridSpec grid;
  const double top = 3.0 * y.cwiseAbs().maxCoeff();
  grid.lambdas = {2.0 * top, top};
  const auto pipe = run_pipeline(xi, y, grid);
  const double sigma2 = 0.49;
  const double expected = y.squaredNorm() - 10.0 * sigma2;

  const auto df_curve = risk_sure_df(y, pipe.fits, pipe.df, sigma2);
  const auto dfs_curve = risk_sure_dfs(y, pipe.fits, pipe.path.dims, pipe.path.lambdas, sigma2);
  const auto lasso_curve =
      risk_sure_lasso(y, pipe.path.fits, pipe.path.dims, pipe.path.lambdas, sigma2);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(df_curve.values[k] == Approx(expected).margin(1e-9));
    REQUIRE(dfs_curve.values[k] == Approx(expected).margin(1e-9));
    REQUIRE(lasso_curve.values[k] == Approx(expected).margin(1e-9));
  }
  // with no jumps the corrected and uncorrected estimates coincide
  REQUIRE(df_curve.values.isApprox(dfs_curve.values));
}

TEST_CASE("the corrected estimate exceeds the uncorrected one by the smoothed term") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = oracles::random_matrix(20, 10, rng);
  const Eigen::VectorXd y = oracles::random_vector(20, rng);
  const auto pipe = run_pipeline(x, y, GridSpec{30});
  const double sigma2 = 1.0;
  const auto df_curve = risk_sure_df(y, pipe.fits, pipe.df, sigma2);
  const auto dfs_curve = risk_sure_dfs(y, pipe.fits, pipe.path.dims, pipe.path.lambdas, sigma2);
  const Eigen::VectorXd gap = df_curve.values - dfs_curve.values;
  REQUIRE(gap.isApprox(Eigen::VectorXd(2.0 * sigma2 * pipe.df.correction), 1e-12));
  REQUIRE(gap.minCoeff() >= 0.0);
}

TEST_CASE("grid misalignment is rejected") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd y(4);
  y << 3, 2, 1, 0.5;
  const auto pipe = run_pipeline(xi, y, GridSpec{10});
  auto fits = pipe.fits;
  fits.pop_back();
  REQUIRE_THROWS_AS(risk_sure_df(y, fits, pipe.df, 1.0), std::invalid_argument);
}

TEST_CASE("cross-validation is constant in lambda on orthogonal designs") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(40, 40);
  std::mt19937_64 rng(3);
  const Eigen::VectorXd y = oracles::random_vector(40, rng);
  const auto grid = make_lambda_grid(xi, y, GridSpec{25});
  const auto curve = risk_cv(xi, y, 5, grid, 1.0, 99);
  REQUIRE(curve.values.maxCoeff() - curve.values.minCoeff() <= 1e-8 * y.squaredNorm());
  REQUIRE(curve.values[0] == Approx(y.squaredNorm() - 40.0).margin(1e-8));
  // ties go to the largest lambda
  REQUIRE(curve.lambda_hat == grid.front());
}

TEST_CASE("cross-validation accepts only five or ten folds") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(12, 12);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(12);
  const std::vector<double> grid = {1.5, 1.0};
  REQUIRE_THROWS_AS(risk_cv(xi, y, 3, grid, 1.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(risk_cv(xi, y, 12, grid, 1.0, 1), std::invalid_argument);
  Eigen::MatrixXd small = Eigen::MatrixXd::Identity(4, 4);
  REQUIRE_THROWS_AS(risk_cv(small, y.head(4), 5, grid, 1.0, 1), std::invalid_argument);
}

TEST_CASE("cross-validation refits the selection on held-in data") {
  // n > p Gaussian design with a strong signal: the CV curve should dip in
  // the interior rather than being monotone.
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = oracles::random_matrix(30, 6, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(6);
  beta[0] = 3.0;
  beta[1] = -2.0;
  const Eigen::VectorXd y = x * beta + 0.3 * oracles::random_vector(30, rng);
  const auto grid = make_lambda_grid(x, y, GridSpec{40});
  const auto curve = risk_cv(x, y, 5, grid, 0.09, 7);
  const std::size_t k_hat = grid_index_of(curve.lambdas, curve.lambda_hat);
  REQUIRE(k_hat > 0);
  REQUIRE(k_hat + 1 < curve.lambdas.size());
}

TEST_CASE("variance estimation from the path") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(5, 5);
  Eigen::VectorXd y(5);
  y << 0.4, -0.3, 0.2, 0.1, -0.25;
  GridSpec grid;
  grid.lambdas = {2.0, 1.0};  // above lambda_max: nothing selected
  const auto path = compute_path(xi, y, grid);
  const auto est = estimate_sigma2_gcv(path, y);
  REQUIRE(est.sigma2_hat == Approx(y.squaredNorm() / 5.0));
  REQUIRE(est.lambda_gcv == 2.0);

  // saturated selection on the whole grid is an error
  Eigen::MatrixXd x2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y2(2);
  y2 << 1.0, -2.0;
  GridSpec tiny;
  tiny.lambdas = {0.5, 0.25};
  const auto path2 = compute_path(x2, y2, tiny);
  REQUIRE_THROWS_AS(estimate_sigma2_gcv(path2, y2), std::runtime_error);
}

TEST_CASE("variance estimate is consistent on a null model", "[slow]") {
  const int n = 400, p = 100, reps = 60;
  std::vector<double> estimates;
  for (int rep = 0; rep < reps; ++rep) {
    const auto x = build_design({DesignType::SimulatedConstCorr, n, p, 0.0},
                                derive_seed(1234, static_cast<std::uint64_t>(2 * rep)));
    const auto y = draw_noise({NoiseKind::Gaussian, 1.0}, n,
                              derive_seed(1234, static_cast<std::uint64_t>(2 * rep + 1)));
    const auto path = compute_path(x, y, GridSpec{50});
    estimates.push_back(estimate_sigma2_gcv(path, y).sigma2_hat);
  }
  REQUIRE(mean(estimates) == Approx(1.0).epsilon(0.10));
}

TEST_CASE("lasso risk estimate matches the orthogonal closed form") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(15, 15);
  std::mt19937_64 rng(8);
  const Eigen::VectorXd y = 1.5 * oracles::random_vector(15, rng);
  const auto path = compute_path(xi, y, GridSpec{20});
  const double sigma2 = 0.8;
  const auto curve = risk_sure_lasso(y, path.fits, path.dims, path.lambdas, sigma2);
  for (std::size_t k = 0; k < path.size(); ++k) {
    double rss = 0.0;
    int active = 0;
    for (int i = 0; i < 15; ++i) {
      const double soft = oracles::soft_threshold(y[i], path.lambdas[k]);
      rss += (y[i] - soft) * (y[i] - soft);
      active += soft != 0.0 ? 1 : 0;
    }
    REQUIRE(curve.values[static_cast<Eigen::Index>(k)] ==
            Approx(rss - 15.0 * sigma2 + 2.0 * sigma2 * active).margin(1e-9));
  }
}

TEST_CASE("lasso risk estimate is unbiased in the orthogonal null model", "[slow]") {
  // E ||soft(y) - mu||^2 per coordinate at mu = 0, sigma = 1 is
  // 2[(1 + l^2) Phi(-l) - l phi(l)] by integrating the tail quadratic.
  const int n = 50, reps = 500;
  const double lambda = 0.8;
  const double truth =
      n * 2.0 * ((1.0 + lambda * lambda) * normal_cdf(-lambda) - lambda * normal_pdf(lambda));
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(n, n);
  GridSpec grid;
  grid.lambdas = {lambda, 0.5 * lambda};
  std::vector<double> estimates, losses;
  for (int rep = 0; rep < reps; ++rep) {
    const auto y = draw_noise({NoiseKind::Gaussian, 1.0}, n,
                              derive_seed(777, static_cast<std::uint64_t>(rep)));
    const auto path = compute_path(xi, y, grid);
    const auto curve = risk_sure_lasso(y, path.fits, path.dims, path.lambdas, 1.0);
    estimates.push_back(curve.values[0]);
    losses.push_back(path.fits[0].squaredNorm());
  }
  const auto est = mean_se(estimates);
  const auto loss = mean_se(losses);
  REQUIRE(std::abs(est.value - truth) <= 3.0 * est.se);
  REQUIRE(std::abs(loss.value - truth) <= 3.0 * loss.se);
}

TEST_CASE("tuning breaks ties toward the larger penalty") {
  RiskCurve curve;
  curve.lambdas = {4.0, 2.0, 1.0, 0.5};
  curve.values = Eigen::VectorXd(4);
  curve.values << 3.0, 1.0, 1.0, 2.0;
  REQUIRE(tune(curve) == 2.0);

  curve.values << 5.0, 5.0, 5.0, 5.0;
  REQUIRE(tune(curve) == 4.0);

  Eigen::VectorXd shifted = curve.values.array() + 11.0;
  REQUIRE(tune(curve.lambdas, shifted) == tune(curve));

  curve.values << 4.0, 2.0, 1.0, 3.0;
  REQUIRE(tune(curve) == 1.0);
}
