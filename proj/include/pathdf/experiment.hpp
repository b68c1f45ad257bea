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
#pragma once

#include <Eigen/Core>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pathdf/design.hpp"
#include "pathdf/dof.hpp"
#include "pathdf/lasso.hpp"
#include "pathdf/projection.hpp"
#include "pathdf/risk.hpp"
#include "pathdf/rng.hpp"
#include "pathdf/stats.hpp"
#include "pathdf/subset.hpp"

namespace pathdf {

struct StudyConfig {
  DesignSpec design;
  BetaSpec beta;
  NoiseModel noise;
  int n_reps = 100;
  GridSpec grid;
  std::vector<TuningMethod> methods = {TuningMethod::Df, TuningMethod::DfS, TuningMethod::CV5,
                                       TuningMethod::CV10, TuningMethod::Lasso};
  SigmaSource sigma_mode = SigmaSource::Known;
  std::uint64_t root_seed = 1;
  DfMethod estimator = DfMethod::LassoOLS;  // estimator under study in df verification
  KdeConfig kde;
  LassoSettings lasso;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    design.validate();
    beta.validate();
    noise.validate();
    if (n_reps < 1) throw std::invalid_argument("study: n_reps must be positive");
    if (support_size(design.n, beta.alpha) > design.p)
      throw std::invalid_argument("study: beta support exceeds p");
    if (estimator == DfMethod::BestSubset && design.p > kSubsetPMax)
      throw std::invalid_argument("study: best subset estimator requires p <= " +
                                  std::to_string(kSubsetPMax));
  }
};

namespace detail {

// Sub-stream tags under one replication seed.
inline constexpr std::uint64_t kStreamDesign = 0;
inline constexpr std::uint64_t kStreamNoise = 1;
inline constexpr std::uint64_t kStreamCv5 = 2;
inline constexpr std::uint64_t kStreamCv10 = 3;

inline std::uint64_t rep_seed(const StudyConfig& cfg, int rep) {
  return derive_seed(cfg.root_seed, static_cast<std::uint64_t>(rep));
}

}  // namespace detail

/// Runs fn(rep) for rep in [0, n) on a small thread pool. Work items own
/// disjoint output slots, so the schedule cannot affect results. The first
/// exception thrown by any item is rethrown after all threads join.
template <typename Fn>
void parallel_for(int n, int max_threads, Fn&& fn) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  const int n_threads = std::max(1, std::min(n, max_threads > 0 ? max_threads : hw));
  if (n_threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Closed forms for the identity design: expected selection dimension and
/// degrees of freedom of the threshold-then-refit estimator.
inline double orthogonal_df_dim(double lambda, const Eigen::VectorXd& mu, double sigma) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    s += normal_cdf((-lambda - mu[i]) / sigma) + 1.0 - normal_cdf((lambda - mu[i]) / sigma);
  return s;
}

inline double orthogonal_df(double lambda, const Eigen::VectorXd& mu, double sigma) {
  double s = orthogonal_df_dim(lambda, mu, sigma);
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    s += lambda *
         (normal_pdf((lambda - mu[i]) / sigma) + normal_pdf((-lambda - mu[i]) / sigma)) / sigma;
  return s;
}

/// Everything one replication can produce; callers request only what they
/// need through RepRequest.
struct RepRequest {
  bool tuning = false;          // tuned losses and selected counts
  bool curves = false;          // per-lambda dims, df estimate, covariance terms
  bool risk_curves = false;     // per-lambda risk estimates and loss curves
  std::vector<double> lambdas;  // common grid; empty = per-replication grid
};

struct RepRecord {
  bool ok = true;
  std::string error;
  double sigma2_used = 0.0;
  double y_sqnorm = 0.0;
  std::map<TuningMethod, double> loss;
  std::map<TuningMethod, int> selected;
  std::map<TuningMethod, double> seconds;
  Eigen::VectorXd dims;
  Eigen::VectorXd df_est;
  Eigen::VectorXd cov_terms;    // <y - mu, muhat^lambda(y)> / sigma^2
  std::map<TuningMethod, Eigen::VectorXd> risk_values;
  Eigen::VectorXd loss_curve;        // refit estimator
  Eigen::VectorXd loss_curve_lasso;  // lasso estimator
};

inline RepRecord run_replication(const StudyConfig& cfg, int rep, const RepRequest& request) {
  using clock = std::chrono::steady_clock;
  const std::uint64_t rseed = detail::rep_seed(cfg, rep);
  RepRecord rec;

  const Eigen::MatrixXd x = build_design(cfg.design, derive_seed(rseed, detail::kStreamDesign));
  const Eigen::VectorXd beta = build_beta(cfg.beta, cfg.design.n, cfg.design.p);
  const Eigen::VectorXd mu = x * beta;
  const Eigen::VectorXd y =
      mu + draw_noise(cfg.noise, cfg.design.n, derive_seed(rseed, detail::kStreamNoise));
  rec.y_sqnorm = y.squaredNorm();

  GridSpec grid = cfg.grid;
  if (!request.lambdas.empty()) grid.lambdas = request.lambdas;

  const bool want_risk = request.tuning || request.risk_curves;
  // The lasso path backs the lasso-OLS estimator, the variance estimate and
  // the tuning curves; a pure best-subset verification run needs none of it.
  const bool need_lasso_path = cfg.estimator == DfMethod::LassoOLS || want_risk ||
                               cfg.sigma_mode == SigmaSource::GcvEstimated;

  const auto t0 = clock::now();
  LassoPath path;
  std::vector<double> lambdas;
  if (need_lasso_path) {
    path = compute_path(x, y, grid, cfg.lasso);
    lambdas = path.lambdas;
  } else {
    lambdas = make_lambda_grid(x, y, grid);
  }
  const auto t_path = clock::now();

  // Estimator under study: lasso-OLS by default, best subset on request.
  std::vector<Eigen::VectorXd> fits;
  std::vector<int> dims;
  std::vector<std::vector<int>> active_sets;
  if (cfg.estimator == DfMethod::BestSubset) {
    SubsetPath bss = compute_subset_path(x, y, lambdas);
    fits = std::move(bss.fits);
    dims = std::move(bss.dims);
    active_sets = std::move(bss.active_sets);
  } else {
    fits = lasso_ols_fit(x, y, path);
    dims = path.dims;
    active_sets = path.active_sets;
  }
  const auto t_refit = clock::now();

  const double sigma2_true = cfg.noise.sigma * cfg.noise.sigma;
  double sigma2 = sigma2_true;
  if (cfg.sigma_mode == SigmaSource::GcvEstimated)
    sigma2 = estimate_sigma2_gcv(path, y).sigma2_hat;
  rec.sigma2_used = sigma2;

  const DfEstimate df_est = estimate_df(lambdas, dims, cfg.estimator, cfg.kde);
  const auto t_df = clock::now();

  const std::size_t n_grid = lambdas.size();
  if (request.curves) {
    rec.dims.resize(static_cast<Eigen::Index>(n_grid));
    rec.cov_terms.resize(static_cast<Eigen::Index>(n_grid));
    for (std::size_t k = 0; k < n_grid; ++k) {
      rec.dims[static_cast<Eigen::Index>(k)] = dims[k];
      rec.cov_terms[static_cast<Eigen::Index>(k)] = (y - mu).dot(fits[k]) / sigma2_true;
    }
    rec.df_est = df_est.df;
  }

  std::map<TuningMethod, RiskCurve> curves;
  std::map<TuningMethod, double> extra_seconds;
  if (want_risk) {
    for (TuningMethod method : cfg.methods) {
      const auto tm0 = clock::now();
      switch (method) {
        case TuningMethod::Df:
          curves[method] = risk_sure_df(y, fits, df_est, sigma2, cfg.sigma_mode);
          break;
        case TuningMethod::DfS:
          curves[method] = risk_sure_dfs(y, fits, dims, lambdas, sigma2, cfg.sigma_mode);
          break;
        case TuningMethod::Lasso:
          curves[method] =
              risk_sure_lasso(y, path.fits, path.dims, path.lambdas, sigma2, cfg.sigma_mode);
          break;
        case TuningMethod::CV5:
          curves[method] = risk_cv(x, y, 5, lambdas, sigma2,
                                   derive_seed(rseed, detail::kStreamCv5), cfg.sigma_mode, cfg.lasso);
          break;
        case TuningMethod::CV10:
          curves[method] = risk_cv(x, y, 10, lambdas, sigma2,
                                   derive_seed(rseed, detail::kStreamCv10), cfg.sigma_mode, cfg.lasso);
          break;
      }
      extra_seconds[method] = std::chrono::duration<double>(clock::now() - tm0).count();
    }
  }

  if (request.risk_curves) {
    for (auto& [method, curve] : curves) rec.risk_values[method] = curve.values;
    rec.loss_curve.resize(static_cast<Eigen::Index>(n_grid));
    rec.loss_curve_lasso.resize(static_cast<Eigen::Index>(n_grid));
    for (std::size_t k = 0; k < n_grid; ++k) {
      rec.loss_curve[static_cast<Eigen::Index>(k)] = (mu - fits[k]).squaredNorm();
      rec.loss_curve_lasso[static_cast<Eigen::Index>(k)] = (mu - path.fits[k]).squaredNorm();
    }
  }

  if (request.tuning) {
    const double seconds_path = std::chrono::duration<double>(t_path - t0).count();
    const double seconds_refit = std::chrono::duration<double>(t_refit - t0).count();
    const double seconds_df = std::chrono::duration<double>(t_df - t0).count();
    for (auto& [method, curve] : curves) {
      const std::size_t k_hat = grid_index_of(curve.lambdas, curve.lambda_hat);
      if (method == TuningMethod::Lasso) {
        rec.loss[method] = (mu - path.fits[k_hat]).squaredNorm();
        rec.seconds[method] = seconds_path + extra_seconds[method];
        rec.selected[method] = static_cast<int>(path.active_sets[k_hat].size());
      } else {
        rec.loss[method] = (mu - fits[k_hat]).squaredNorm();
        rec.seconds[method] =
            (method == TuningMethod::Df ? seconds_df : seconds_refit) + extra_seconds[method];
        rec.selected[method] = static_cast<int>(active_sets[k_hat].size());
      }
    }
  }
  return rec;
}

struct MethodSummary {
  TuningMethod method = TuningMethod::Df;
  double rel_risk = 0.0;
  double rel_risk_se = 0.0;
  double selected_mean = 0.0;
  double selected_se = 0.0;
  double seconds_mean = 0.0;
};

struct StudyResult {
  std::vector<MethodSummary> methods;
  double oracle_rel_risk = 0.0;
  int n_reps_done = 0;
  int n_dropped = 0;
  double sigma2_mean = 0.0;  // average variance used across replications
};

/// Full Monte Carlo tuning study: per replication a fresh design and noise
/// draw, the whole path/refit/df/risk pipeline, tuned losses per method.
/// Replications run in parallel with derived seeds; failed replications are
/// dropped and counted, and more than 1% drops fails the study.
inline StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  RepRequest request;
  request.tuning = true;
  if (!cfg.grid.lambdas.empty()) request.lambdas = cfg.grid.lambdas;

  std::vector<RepRecord> records(static_cast<std::size_t>(cfg.n_reps));
  parallel_for(cfg.n_reps, cfg.threads, [&](int rep) {
    try {
      records[static_cast<std::size_t>(rep)] = run_replication(cfg, rep, request);
    } catch (const std::exception& e) {
      records[static_cast<std::size_t>(rep)].ok = false;
      records[static_cast<std::size_t>(rep)].error = e.what();
    }
  });

  StudyResult result;
  std::vector<double> sigma2s;
  for (const auto& rec : records) {
    if (rec.ok) {
      ++result.n_reps_done;
      sigma2s.push_back(rec.sigma2_used);
    } else {
      ++result.n_dropped;
    }
  }
  if (result.n_reps_done == 0 ||
      static_cast<double>(result.n_dropped) > 0.01 * static_cast<double>(cfg.n_reps)) {
    std::string detail;
    for (const auto& rec : records)
      if (!rec.ok) {
        detail = rec.error;
        break;
      }
    throw std::runtime_error("study dropped " + std::to_string(result.n_dropped) + " of " +
                             std::to_string(cfg.n_reps) + " replications (first error: " + detail +
                             ")");
  }
  result.sigma2_mean = mean(sigma2s);

  const double sigma2_true = cfg.noise.sigma * cfg.noise.sigma;
  const double scale = sigma2_true * static_cast<double>(cfg.design.n);
  for (TuningMethod method : cfg.methods) {
    std::vector<double> losses, selected, seconds;
    for (const auto& rec : records) {
      if (!rec.ok) continue;
      losses.push_back(rec.loss.at(method));
      selected.push_back(static_cast<double>(rec.selected.at(method)));
      seconds.push_back(rec.seconds.at(method));
    }
    MethodSummary summary;
    summary.method = method;
    const auto loss_ms = mean_se(losses);
    summary.rel_risk = loss_ms.value / scale;
    summary.rel_risk_se = loss_ms.se / scale;
    const auto sel_ms = mean_se(selected);
    summary.selected_mean = sel_ms.value;
    summary.selected_se = sel_ms.se;
    summary.seconds_mean = mean(seconds);
    result.methods.push_back(summary);
  }

  // Oracle reference: least squares on the true support.
  const Eigen::MatrixXd x0 =
      build_design(cfg.design, derive_seed(detail::rep_seed(cfg, 0), detail::kStreamDesign));
  const Eigen::VectorXd beta = build_beta(cfg.beta, cfg.design.n, cfg.design.p);
  result.oracle_rel_risk =
      oracle_ols_risk(x0, beta, cfg.noise.sigma) / scale;
  return result;
}

/// Deterministic common lambda grid for runs that average curves across
/// replications: explicit grid if configured, otherwise the generated grid
/// of replication zero.
inline std::vector<double> resolve_common_grid(const StudyConfig& cfg) {
  if (!cfg.grid.lambdas.empty()) return cfg.grid.lambdas;
  const std::uint64_t rseed = detail::rep_seed(cfg, 0);
  const Eigen::MatrixXd x = build_design(cfg.design, derive_seed(rseed, detail::kStreamDesign));
  const Eigen::VectorXd beta = build_beta(cfg.beta, cfg.design.n, cfg.design.p);
  const Eigen::VectorXd y =
      x * beta + draw_noise(cfg.noise, cfg.design.n, derive_seed(rseed, detail::kStreamNoise));
  return make_lambda_grid(x, y, cfg.grid);
}

struct DfVerifyReport {
  std::vector<double> lambdas;
  Eigen::VectorXd cov_df, cov_se;          // covariance definition
  Eigen::VectorXd mean_dim, dim_se;        // divergence estimate
  Eigen::VectorXd mean_df_est, df_est_se;  // dim + smoothed correction
  Eigen::VectorXd analytic_dim, analytic_df;  // orthogonal closed forms
  bool has_analytic = false;
  std::vector<bool> flagged;  // |cov_df - mean_df_est| > 3 combined SEs
  int n_reps = 0;
};

/// Monte Carlo comparison of the covariance definition of degrees of
/// freedom, the raw selection dimension, and the jump-corrected estimate,
/// averaged over replications on a common grid.
inline DfVerifyReport verify_df_identity(const StudyConfig& cfg) {
  cfg.validate();
  RepRequest request;
  request.curves = true;
  request.lambdas = resolve_common_grid(cfg);

  std::vector<RepRecord> records(static_cast<std::size_t>(cfg.n_reps));
  parallel_for(cfg.n_reps, cfg.threads, [&](int rep) {
    records[static_cast<std::size_t>(rep)] = run_replication(cfg, rep, request);
  });

  DfVerifyReport report;
  report.lambdas = request.lambdas;
  report.n_reps = cfg.n_reps;
  const auto n_grid = static_cast<Eigen::Index>(request.lambdas.size());
  report.cov_df.resize(n_grid);
  report.cov_se.resize(n_grid);
  report.mean_dim.resize(n_grid);
  report.dim_se.resize(n_grid);
  report.mean_df_est.resize(n_grid);
  report.df_est_se.resize(n_grid);
  report.flagged.resize(static_cast<std::size_t>(n_grid));

  std::vector<double> column(static_cast<std::size_t>(cfg.n_reps));
  auto column_stats = [&](auto getter) {
    for (int r = 0; r < cfg.n_reps; ++r)
      column[static_cast<std::size_t>(r)] = getter(records[static_cast<std::size_t>(r)]);
    return mean_se(column);
  };
  for (Eigen::Index k = 0; k < n_grid; ++k) {
    const auto cov = column_stats([&](const RepRecord& r) { return r.cov_terms[k]; });
    const auto dim = column_stats([&](const RepRecord& r) { return r.dims[k]; });
    const auto dfe = column_stats([&](const RepRecord& r) { return r.df_est[k]; });
    report.cov_df[k] = cov.value;
    report.cov_se[k] = cov.se;
    report.mean_dim[k] = dim.value;
    report.dim_se[k] = dim.se;
    report.mean_df_est[k] = dfe.value;
    report.df_est_se[k] = dfe.se;
    const double gap = std::abs(cov.value - dfe.value);
    report.flagged[static_cast<std::size_t>(k)] =
        gap > 3.0 * std::sqrt(cov.se * cov.se + dfe.se * dfe.se);
  }

  if (cfg.design.type == DesignType::Orthogonal) {
    report.has_analytic = true;
    const Eigen::VectorXd beta = build_beta(cfg.beta, cfg.design.n, cfg.design.p);
    report.analytic_dim.resize(n_grid);
    report.analytic_df.resize(n_grid);
    for (Eigen::Index k = 0; k < n_grid; ++k) {
      const double lambda = request.lambdas[static_cast<std::size_t>(k)];
      report.analytic_dim[k] = orthogonal_df_dim(lambda, beta, cfg.noise.sigma);
      report.analytic_df[k] = orthogonal_df(lambda, beta, cfg.noise.sigma);
    }
  }
  return report;
}

struct MseRow {
  TuningMethod method = TuningMethod::Df;
  double integrated_mse = 0.0;
  double mse_at_opt = 0.0;
  double lambda_opt = 0.0;
  bool clipped = false;
};

struct WindowIntegral {
  double value = 0.0;
  bool clipped = false;
};

/// Trapezoid integral of a curve over log-lambda, restricted to one decade
/// on either side of the grid point `k_center`; `deltas` must be strictly
/// decreasing. Flags when the window sticks out of the grid.
inline WindowIntegral integrate_log_decade(const std::vector<double>& deltas,
                                           const Eigen::VectorXd& values,
                                           std::size_t k_center) {
  if (deltas.size() != static_cast<std::size_t>(values.size()) || deltas.empty() ||
      k_center >= deltas.size())
    throw std::invalid_argument("integrate_log_decade: bad arguments");
  const double lo = deltas[k_center] - std::log(10.0);
  const double hi = deltas[k_center] + std::log(10.0);
  WindowIntegral out;
  out.clipped = hi > deltas.front() || lo < deltas.back();
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    const double d1 = deltas[k];
    const double d2 = deltas[k + 1];
    const double a = std::min(d1, hi);  // segment [d2, d1] clipped to the window
    const double b = std::max(d2, lo);
    if (a <= b) continue;
    const auto at = [&](double d) {
      const double t = (d1 - d) / (d1 - d2);
      return (1.0 - t) * values[static_cast<Eigen::Index>(k)] +
             t * values[static_cast<Eigen::Index>(k + 1)];
    };
    out.value += 0.5 * (at(a) + at(b)) * (a - b);
  }
  return out;
}

struct MseTable {
  std::vector<double> lambdas;
  std::vector<MseRow> rows;
  Eigen::VectorXd truth;        // Monte Carlo risk of the refit estimator
  Eigen::VectorXd truth_lasso;  // Monte Carlo risk of the lasso estimator
  int n_reps = 0;
};

/// Mean squared error of each risk-estimate curve against the Monte Carlo
/// risk, integrated over one decade of lambda on either side of the
/// risk-optimal point and evaluated at that point.
inline MseTable mse_of_risk_estimates(const StudyConfig& cfg) {
  cfg.validate();
  RepRequest request;
  request.risk_curves = true;
  request.lambdas = resolve_common_grid(cfg);

  std::vector<RepRecord> records(static_cast<std::size_t>(cfg.n_reps));
  parallel_for(cfg.n_reps, cfg.threads, [&](int rep) {
    records[static_cast<std::size_t>(rep)] = run_replication(cfg, rep, request);
  });

  MseTable table;
  table.lambdas = request.lambdas;
  table.n_reps = cfg.n_reps;
  const auto n_grid = static_cast<Eigen::Index>(request.lambdas.size());
  table.truth.resize(n_grid);
  table.truth_lasso.resize(n_grid);
  std::vector<double> column(static_cast<std::size_t>(cfg.n_reps));
  auto mean_column = [&](auto getter) {
    for (int r = 0; r < cfg.n_reps; ++r)
      column[static_cast<std::size_t>(r)] = getter(records[static_cast<std::size_t>(r)]);
    return mean(column);
  };
  for (Eigen::Index k = 0; k < n_grid; ++k) {
    table.truth[k] = mean_column([&](const RepRecord& r) { return r.loss_curve[k]; });
    table.truth_lasso[k] = mean_column([&](const RepRecord& r) { return r.loss_curve_lasso[k]; });
  }

  std::vector<double> deltas(request.lambdas.size());
  for (std::size_t k = 0; k < request.lambdas.size(); ++k)
    deltas[k] = std::log(request.lambdas[k]);

  for (TuningMethod method : cfg.methods) {
    const Eigen::VectorXd& truth =
        method == TuningMethod::Lasso ? table.truth_lasso : table.truth;
    MseRow row;
    row.method = method;
    row.lambda_opt = tune(request.lambdas, truth);
    const auto k_opt = static_cast<Eigen::Index>(grid_index_of(request.lambdas, row.lambda_opt));

    Eigen::VectorXd mse(n_grid);
    for (Eigen::Index k = 0; k < n_grid; ++k) {
      mse[k] = mean_column([&](const RepRecord& r) {
        const double diff = r.risk_values.at(method)[k] - truth[k];
        return diff * diff;
      });
    }
    row.mse_at_opt = mse[k_opt];
    const auto integral = integrate_log_decade(deltas, mse, static_cast<std::size_t>(k_opt));
    row.integrated_mse = integral.value;
    row.clipped = integral.clipped;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace pathdf
