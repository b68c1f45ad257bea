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

#include <numbers>

#include "oracles.hpp"
#include "pathdf/design.hpp"
#include "pathdf/dof.hpp"
#include "pathdf/experiment.hpp"

using Catch::Approx;
using namespace pathdf;

namespace {

std::vector<double> lambda_ladder(std::initializer_list<double> deltas) {
  std::vector<double> out;
  for (double d : deltas) out.push_back(std::exp(d));
  return out;
}

}  // namespace

TEST_CASE("monotone dimension sequences jump at each increase") {
  const auto lambdas = lambda_ladder({0.0, -1.0, -2.0, -3.0, -4.0});
  const auto record = extract_jumps(lambdas, {0, 0, 1, 1, 2});
  REQUIRE(record.total == 2);
  REQUIRE(record.multiplicities == std::vector<int>{1, 1});
  // crossings are located at the log-midpoint of the bracketing interval
  REQUIRE(record.deltas[0] == Approx(-1.5));
  REQUIRE(record.deltas[1] == Approx(-3.5));
}

TEST_CASE("positive excursions are discarded by the running infimum") {
  // Raw dimensions 0,2,1,3 as lambda decreases: the spike to 2 is a positive
  // excursion; only its permanent part contributes. The running infimum is
  // 0,1,1,3, giving a jump of 1 then a jump of 2.
  const auto lambdas = lambda_ladder({0.0, -1.0, -2.0, -3.0});
  const auto record = extract_jumps(lambdas, {0, 2, 1, 3});
  REQUIRE(record.total == 3);
  REQUIRE(record.multiplicities == std::vector<int>{1, 2});
  REQUIRE(record.deltas[0] == Approx(-0.5));
  REQUIRE(record.deltas[1] == Approx(-2.5));
  REQUIRE(running_infimum({0, 2, 1, 3}) == std::vector<int>{0, 1, 1, 3});
}

TEST_CASE("constant dimensions produce no jumps") {
  const auto lambdas = lambda_ladder({0.0, -1.0, -2.0});
  const auto record = extract_jumps(lambdas, {4, 4, 4});
  REQUIRE(record.total == 0);
  REQUIRE(record.deltas.empty());
}

TEST_CASE("identity-design jumps sit at the coordinate magnitudes") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(6, 6);
  Eigen::VectorXd y(6);
  y << 2.2, -1.4, 0.9, -0.55, 0.3, 0.17;
  GridSpec grid;
  grid.n_lambda = 400;
  grid.ratio = 0.05;
  const LassoPath path = compute_path(xi, y, grid);
  const auto record = extract_jumps(path);
  const double step = std::log(1.0 / 0.05) / 399.0;
  REQUIRE(record.total == 6);  // every |y_i| lies inside (lambda_min, lambda_max]
  for (int i = 0; i < 6; ++i) {
    REQUIRE(record.multiplicities[i] == 1);
    REQUIRE(record.deltas[i] == Approx(std::log(std::abs(y[i]))).margin(step));
  }
}

TEST_CASE("inserting grid points where dimensions are constant changes nothing") {
  const auto lambdas = lambda_ladder({0.0, -1.0, -2.0, -3.0});
  const std::vector<int> dims = {0, 1, 1, 3};
  const auto base = extract_jumps(lambdas, dims);
  const auto fine_lambdas = lambda_ladder({0.0, -1.0, -1.5, -2.0, -3.0});
  const auto fine = extract_jumps(fine_lambdas, {0, 1, 1, 1, 3});
  REQUIRE(base.total == fine.total);
  REQUIRE(base.multiplicities == fine.multiplicities);
  for (std::size_t i = 0; i < base.deltas.size(); ++i)
    REQUIRE(base.deltas[i] == Approx(fine.deltas[i]).margin(0.51));
}

TEST_CASE("a single jump smooths to one scaled kernel") {
  JumpRecord record;
  record.deltas = {0.0};
  record.multiplicities = {1};
  record.total = 1;
  std::vector<double> eval;
  for (int i = -10; i <= 10; ++i) eval.push_back(0.1 * i);
  const Eigen::VectorXd out = smooth_jumps(record, eval);
  const double floor_bw = 0.1 * 2.0 / std::sqrt(1.0);  // 0.1 * range / sqrt(total)
  REQUIRE(out[10] == Approx(1.0 / (floor_bw * std::sqrt(2.0 * std::numbers::pi))));
  REQUIRE(out.minCoeff() >= 0.0);
}

TEST_CASE("empty records smooth to zero") {
  const Eigen::VectorXd out = smooth_jumps(JumpRecord{}, {0.0, 1.0, 2.0});
  REQUIRE(out.isZero());
}

TEST_CASE("the smoothed intensity integrates to the jump total") {
  JumpRecord record;
  record.deltas = {-1.0, 0.3, 0.8, 2.0};
  record.multiplicities = {2, 1, 3, 1};
  record.total = 7;
  std::vector<double> eval;
  for (int i = 0; i <= 3000; ++i) eval.push_back(-15.0 + 0.01 * i);
  const Eigen::VectorXd out = smooth_jumps(record, eval);
  double integral = 0.0;
  for (int i = 0; i + 1 <= 3000; ++i) integral += 0.5 * (out[i] + out[i + 1]) * 0.01;
  REQUIRE(integral == Approx(7.0).epsilon(0.02));
  REQUIRE(out.minCoeff() >= 0.0);
}

TEST_CASE("best-subset corrections double the smoothed term") {
  const auto lambdas = lambda_ladder({0.0, -0.5, -1.0, -1.5, -2.0});
  const std::vector<int> dims = {0, 1, 1, 2, 3};
  const auto ols = estimate_df(lambdas, dims, DfMethod::LassoOLS);
  const auto bss = estimate_df(lambdas, dims, DfMethod::BestSubset);
  REQUIRE(ols.correction.isApprox(bss.correction));
  REQUIRE((bss.df - bss.df_dim).isApprox(2.0 * (ols.df - ols.df_dim)));
  REQUIRE(ols.multiplier == 1.0);
  REQUIRE(bss.multiplier == 2.0);
}

TEST_CASE("df stays near zero above the top of the path") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Identity(20, 20);
  std::mt19937_64 rng(3);
  Eigen::VectorXd y = oracles::random_vector(20, rng);
  y = y.cwiseMin(1.0).cwiseMax(-1.0);
  GridSpec grid;
  grid.lambdas = {8.0, 7.0, 6.0, 5.0};  // all far above max |y_i|
  const LassoPath path = compute_path(xi, y, grid);
  const auto est = estimate_df(path, DfMethod::LassoOLS);
  REQUIRE(est.df.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("orthogonal null-model correction matches the closed form", "[slow]") {
  // For the identity design with mu = 0, sigma = 1, the correction estimates
  // 2 n lambda phi(lambda): 48.394 at lambda = 1, n = 100.
  const int n = 100, reps = 400;
  std::vector<double> lambdas;
  for (int i = 71; i >= 0; --i) lambdas.push_back(std::exp((i - 60) * 0.05));
  StudyConfig cfg;
  cfg.design = {DesignType::Orthogonal, n, n};
  cfg.beta = {1.0, 0.0};
  cfg.noise = {NoiseKind::Gaussian, 1.0};
  cfg.n_reps = reps;
  cfg.grid.lambdas = lambdas;
  cfg.root_seed = 404;
  const auto report = verify_df_identity(cfg);
  const std::size_t k1 = grid_index_of(report.lambdas, 1.0);
  const double mean_correction =
      report.mean_df_est[static_cast<Eigen::Index>(k1)] -
      report.mean_dim[static_cast<Eigen::Index>(k1)];
  const double analytic = 2.0 * n * 1.0 * normal_pdf(1.0);
  REQUIRE(analytic == Approx(48.394).margin(0.001));
  REQUIRE(mean_correction == Approx(analytic).epsilon(0.10));
}
