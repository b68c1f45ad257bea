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

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <string>

#include "pathdf/pathdf.hpp"

namespace {

namespace fs = std::filesystem;

pathdf::StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return pathdf::study_config_from_json(j);
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_manifest(const fs::path& dir, const pathdf::StudyConfig& cfg,
                    const std::map<std::string, double>& timings) {
  write_file(dir / "manifest.json", pathdf::make_manifest(cfg, timings).dump(2) + "\n");
}

double run_timed(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = load_config(config_path);
  pathdf::StudyResult result;
  const double secs = run_timed([&] { result = pathdf::run_study(cfg); });
  write_file(fs::path(out_dir) / "study.csv", pathdf::to_csv(result));
  write_manifest(out_dir, cfg,
                 {{"total", secs}, {"dropped", static_cast<double>(result.n_dropped)}});
  std::cout << "study written to " << out_dir << " (" << result.n_reps_done << " replications, "
            << result.n_dropped << " dropped)\n";
  return 0;
}

int cmd_verify_df(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = load_config(config_path);
  pathdf::DfVerifyReport report;
  const double secs = run_timed([&] { report = pathdf::verify_df_identity(cfg); });
  write_file(fs::path(out_dir) / "verify_df.csv", pathdf::to_csv(report));
  write_manifest(out_dir, cfg, {{"total", secs}});
  int flagged = 0;
  for (bool f : report.flagged) flagged += f ? 1 : 0;
  std::cout << "df verification written to " << out_dir << " (" << flagged << "/"
            << report.flagged.size() << " grid points flagged)\n";
  return 0;
}

int cmd_mse_table(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = load_config(config_path);
  pathdf::MseTable table;
  const double secs = run_timed([&] { table = pathdf::mse_of_risk_estimates(cfg); });
  write_file(fs::path(out_dir) / "mse.csv", pathdf::to_csv(table));
  write_manifest(out_dir, cfg, {{"total", secs}});
  for (const auto& row : table.rows)
    if (row.clipped)
      std::cerr << "warning: integration window clipped at the grid edge for "
                << pathdf::to_string(row.method) << "\n";
  std::cout << "mse table written to " << out_dir << "\n";
  return 0;
}

int cmd_regions(double angle_deg, double lambda, const std::string& method, double range,
                double step, const std::string& out_file) {
  Eigen::MatrixXd x(2, 2);
  const double theta = angle_deg * std::numbers::pi / 180.0;
  x << 1.0, std::cos(theta), 0.0, std::sin(theta);
  std::vector<double> ys;
  for (double v = -range; v <= range + 1e-12; v += step) ys.push_back(v);
  const auto estimator = method == "best_subset" ? pathdf::RegionEstimator::BestSubset
                                                 : pathdf::RegionEstimator::Lasso;
  const Eigen::MatrixXi labels = pathdf::classify_region_grid(x, lambda, ys, ys, estimator);
  write_file(out_file, pathdf::region_grid_csv(ys, ys, labels));
  std::cout << "region grid written to " << out_file << "\n";
  return 0;
}

int cmd_tune(const std::string& x_path, const std::string& y_path, bool has_header,
             double sigma2_arg, std::uint64_t seed, const std::string& out_file) {
  const Eigen::MatrixXd x = pathdf::load_matrix_csv(x_path, has_header);
  const Eigen::MatrixXd y_mat = pathdf::load_matrix_csv(y_path, has_header);
  if (y_mat.cols() != 1) throw std::runtime_error("response file must have a single column");
  const Eigen::VectorXd y = y_mat.col(0);
  if (y.size() != x.rows()) throw std::runtime_error("X and y row counts differ");

  const pathdf::LassoPath path = pathdf::compute_path(x, y, pathdf::GridSpec{});
  const auto fits = pathdf::lasso_ols_fit(x, y, path);
  const auto df_est = pathdf::estimate_df(path, pathdf::DfMethod::LassoOLS);

  double sigma2 = sigma2_arg;
  pathdf::SigmaSource source = pathdf::SigmaSource::Known;
  if (!(sigma2 > 0.0)) {
    const auto gcv = pathdf::estimate_sigma2_gcv(path, y);
    sigma2 = gcv.sigma2_hat;
    source = pathdf::SigmaSource::GcvEstimated;
  }

  std::vector<pathdf::RiskCurve> curves;
  curves.push_back(pathdf::risk_sure_df(y, fits, df_est, sigma2, source));
  curves.push_back(pathdf::risk_sure_dfs(y, fits, path.dims, path.lambdas, sigma2, source));
  curves.push_back(pathdf::risk_cv(x, y, 5, path.lambdas, sigma2, pathdf::derive_seed(seed, 5), source));
  curves.push_back(pathdf::risk_cv(x, y, 10, path.lambdas, sigma2, pathdf::derive_seed(seed, 10), source));
  curves.push_back(
      pathdf::risk_sure_lasso(y, path.fits, path.dims, path.lambdas, sigma2, source));

  std::ostringstream out;
  out << "method,lambda_hat,sigma2,sigma_source\n";
  for (const auto& curve : curves)
    out << pathdf::to_string(curve.method) << ',' << pathdf::format_double(curve.lambda_hat) << ','
        << pathdf::format_double(sigma2) << ','
        << (source == pathdf::SigmaSource::Known ? "known" : "gcv") << '\n';
  write_file(out_file, out.str());
  std::cout << "tuning results written to " << out_file << "\n";
  return 0;
}

int cmd_path(const std::string& x_path, const std::string& y_path, bool has_header,
             const std::string& out_file, const std::string& json_file, bool coefficients) {
  const Eigen::MatrixXd x = pathdf::load_matrix_csv(x_path, has_header);
  const Eigen::MatrixXd y_mat = pathdf::load_matrix_csv(y_path, has_header);
  const Eigen::VectorXd y = y_mat.col(0);
  const pathdf::LassoPath path = pathdf::compute_path(x, y, pathdf::GridSpec{});
  write_file(out_file, pathdf::to_csv(path));
  if (!json_file.empty()) write_file(json_file, pathdf::to_json(path, coefficients).dump(2) + "\n");
  const auto df_est = pathdf::estimate_df(path, pathdf::DfMethod::LassoOLS);
  write_file(fs::path(out_file).parent_path() / "df.csv", pathdf::to_csv(df_est));
  std::cout << "path written to " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degrees-of-freedom and risk estimation for selection-based regression estimators"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  auto add_config_opts = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON study configuration")->required();
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo tuning study");
  add_config_opts(simulate);

  auto* verify = app.add_subcommand("verify-df", "compare df estimates against the covariance form");
  add_config_opts(verify);

  auto* mse = app.add_subcommand("mse-table", "mean squared errors of the risk estimates");
  add_config_opts(mse);

  double angle_deg = 90.0, lambda = 1.0, range = 3.0, step = 0.05;
  std::string method = "lasso", region_out = "regions.csv";
  auto* regions = app.add_subcommand("regions", "2d selection-region classification grid");
  regions->add_option("--angle-deg", angle_deg, "angle between the two design columns");
  regions->add_option("--lambda", lambda, "penalty value");
  regions->add_option("--method", method, "lasso or best_subset")
      ->check(CLI::IsMember({"lasso", "best_subset"}));
  regions->add_option("--range", range, "half-width of the grid");
  regions->add_option("--step", step, "grid step");
  regions->add_option("--out", region_out, "output CSV");

  std::string x_path, y_path, tune_out = "tune.csv";
  bool has_header = false;
  double sigma2 = 0.0;
  std::uint64_t seed = 1;
  auto* tune = app.add_subcommand("tune", "tune lambda for a dataset given as CSV X and y");
  tune->add_option("--x", x_path, "design matrix CSV")->required();
  tune->add_option("--y", y_path, "response CSV (single column)")->required();
  tune->add_flag("--header", has_header, "skip one header row in the CSV inputs");
  tune->add_option("--sigma2", sigma2, "known noise variance (omit to estimate by GCV)");
  tune->add_option("--seed", seed, "seed for cross-validation folds");
  tune->add_option("--out", tune_out, "output CSV");

  std::string path_out = "path.csv", path_json;
  bool with_coefs = false;
  auto* path_cmd = app.add_subcommand("path", "lasso path with dimensions and df estimate");
  path_cmd->add_option("--x", x_path, "design matrix CSV")->required();
  path_cmd->add_option("--y", y_path, "response CSV (single column)")->required();
  path_cmd->add_flag("--header", has_header, "skip one header row in the CSV inputs");
  path_cmd->add_option("--out", path_out, "output CSV");
  path_cmd->add_option("--json", path_json, "also write a JSON dump");
  path_cmd->add_flag("--coefficients", with_coefs, "include full coefficients in the JSON dump");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
    if (verify->parsed()) return cmd_verify_df(config_path, out_dir);
    if (mse->parsed()) return cmd_mse_table(config_path, out_dir);
    if (regions->parsed()) return cmd_regions(angle_deg, lambda, method, range, step, region_out);
    if (tune->parsed()) return cmd_tune(x_path, y_path, has_header, sigma2, seed, tune_out);
    if (path_cmd->parsed()) return cmd_path(x_path, y_path, has_header, path_out, path_json, with_coefs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
