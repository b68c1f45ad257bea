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
#include <Eigen/QR>
#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pathdf/dof.hpp"
#include "pathdf/lasso.hpp"
#include "pathdf/rng.hpp"

namespace pathdf {

enum class TuningMethod { Df, DfS, CV5, CV10, Lasso };

inline const char* to_string(TuningMethod m) {
  switch (m) {
    case TuningMethod::Df: return "df";
    case TuningMethod::DfS: return "df_s";
    case TuningMethod::CV5: return "cv5";
    case TuningMethod::CV10: return "cv10";
    case TuningMethod::Lasso: return "lasso";
  }
  return "?";
}

enum class SigmaSource { Known, GcvEstimated };

struct RiskCurve {
  TuningMethod method = TuningMethod::Df;
  std::vector<double> lambdas;
  Eigen::VectorXd values;
  double lambda_hat = 0.0;
  SigmaSource sigma_source = SigmaSource::Known;
};

/// Grid argmin with ties broken toward the larger lambda (grids are stored
/// decreasing, so the first minimizer wins).
inline double tune(const std::vector<double>& lambdas, const Eigen::VectorXd& values) {
  if (lambdas.empty() || static_cast<Eigen::Index>(lambdas.size()) != values.size())
    throw std::invalid_argument("tune: empty or misaligned curve");
  std::size_t best = 0;
  for (std::size_t k = 1; k < lambdas.size(); ++k)
    if (values[static_cast<Eigen::Index>(k)] < values[static_cast<Eigen::Index>(best)]) best = k;
  return lambdas[best];
}

inline double tune(const RiskCurve& curve) { return tune(curve.lambdas, curve.values); }

inline std::size_t grid_index_of(const std::vector<double>& lambdas, double lambda) {
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    if (lambdas[k] == lambda) return k;
  throw std::invalid_argument("lambda is not a grid point");
}

namespace detail {

inline void check_alignment(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("grid misalignment in ") + what);
}

}  // namespace detail

/// ||y - fit||^2 - n sigma^2 + 2 sigma^2 (dim + correction): the
/// selection-adjusted unbiased risk estimate for the refit estimator.
inline RiskCurve risk_sure_df(const Eigen::VectorXd& y, const std::vector<Eigen::VectorXd>& fits,
                              const DfEstimate& df_estimate, double sigma2,
                              SigmaSource source = SigmaSource::Known) {
  detail::check_alignment(fits.size(), df_estimate.lambdas.size(), "risk_sure_df");
  RiskCurve curve;
  curve.method = TuningMethod::Df;
  curve.lambdas = df_estimate.lambdas;
  curve.sigma_source = source;
  const double n = static_cast<double>(y.size());
  curve.values.resize(static_cast<Eigen::Index>(fits.size()));
  for (std::size_t k = 0; k < fits.size(); ++k)
    curve.values[static_cast<Eigen::Index>(k)] =
        (y - fits[k]).squaredNorm() - n * sigma2 + 2.0 * sigma2 * df_estimate.df[static_cast<Eigen::Index>(k)];
  curve.lambda_hat = tune(curve);
  return curve;
}

/// Same risk expansion but with the raw selection dimension only; it ignores
/// the selection step entirely.
inline RiskCurve risk_sure_dfs(const Eigen::VectorXd& y, const std::vector<Eigen::VectorXd>& fits,
                               const std::vector<int>& dims, const std::vector<double>& lambdas,
                               double sigma2, SigmaSource source = SigmaSource::Known) {
  detail::check_alignment(fits.size(), dims.size(), "risk_sure_dfs");
  detail::check_alignment(fits.size(), lambdas.size(), "risk_sure_dfs");
  RiskCurve curve;
  curve.method = TuningMethod::DfS;
  curve.lambdas = lambdas;
  curve.sigma_source = source;
  const double n = static_cast<double>(y.size());
  curve.values.resize(static_cast<Eigen::Index>(fits.size()));
  for (std::size_t k = 0; k < fits.size(); ++k)
    curve.values[static_cast<Eigen::Index>(k)] =
        (y - fits[k]).squaredNorm() - n * sigma2 + 2.0 * sigma2 * dims[k];
  curve.lambda_hat = tune(curve);
  return curve;
}

/// SURE for the lasso itself (its divergence is the selection dimension).
inline RiskCurve risk_sure_lasso(const Eigen::VectorXd& y,
                                 const std::vector<Eigen::VectorXd>& lasso_fits,
                                 const std::vector<int>& dims, const std::vector<double>& lambdas,
                                 double sigma2, SigmaSource source = SigmaSource::Known) {
  RiskCurve curve = risk_sure_dfs(y, lasso_fits, dims, lambdas, sigma2, source);
  curve.method = TuningMethod::Lasso;
  curve.lambda_hat = tune(curve);
  return curve;
}

/// K-fold cross-validation of the full select-then-refit pipeline. Folds are
/// a seeded random partition into K near-equal blocks; each fold refits its
/// own lasso solutions on the common lambda grid and scores held-out
/// prediction error. Returns sum of fold errors minus n sigma^2.
inline RiskCurve risk_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k_folds,
                         const std::vector<double>& lambdas, double sigma2, std::uint64_t seed,
                         SigmaSource source = SigmaSource::Known,
                         const LassoSettings& settings = {}) {
  if (k_folds != 5 && k_folds != 10)
    throw std::invalid_argument("cross-validation supports K in {5, 10}");
  const int n = static_cast<int>(x.rows());
  if (n < k_folds) throw std::invalid_argument("cross-validation needs n >= K");
  if (lambdas.empty()) throw std::invalid_argument("cross-validation needs a lambda grid");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  RiskCurve curve;
  curve.method = k_folds == 5 ? TuningMethod::CV5 : TuningMethod::CV10;
  curve.lambdas = lambdas;
  curve.sigma_source = source;
  curve.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lambdas.size()));

  for (int fold = 0; fold < k_folds; ++fold) {
    const int begin = (fold * n) / k_folds;
    const int end = ((fold + 1) * n) / k_folds;
    const int n_test = end - begin;
    if (n_test <= 0) throw std::invalid_argument("cross-validation fold is empty");
    const int n_train = n - n_test;
    Eigen::MatrixXd x_train(n_train, x.cols()), x_test(n_test, x.cols());
    Eigen::VectorXd y_train(n_train), y_test(n_test);
    int it = 0, iv = 0;
    for (int i = 0; i < n; ++i) {
      const int row = perm[static_cast<std::size_t>(i)];
      if (i >= begin && i < end) {
        x_test.row(iv) = x.row(row);
        y_test[iv++] = y[row];
      } else {
        x_train.row(it) = x.row(row);
        y_train[it++] = y[row];
      }
    }

    LassoSolver solver(x_train, y_train, settings);
    CholeskyRefit refit(x_train, y_train);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      solver.solve(lambdas[k]);
      const std::vector<int> active = solver.active_set();
      refit.prepare(active);
      const Eigen::VectorXd coef = refit.coefficients();
      Eigen::VectorXd pred = Eigen::VectorXd::Zero(n_test);
      for (std::size_t c = 0; c < active.size(); ++c)
        pred.noalias() += coef[static_cast<Eigen::Index>(c)] * x_test.col(active[c]);
      curve.values[static_cast<Eigen::Index>(k)] += (y_test - pred).squaredNorm();
    }
  }
  curve.values.array() -= static_cast<double>(n) * sigma2;
  curve.lambda_hat = tune(curve);
  return curve;
}

struct GcvEstimate {
  double sigma2_hat = 0.0;
  double lambda_gcv = 0.0;
};

/// Variance estimate from the lasso path: pick lambda by generalized
/// cross-validation over grid points with dim < n, then divide the residual
/// sum of squares by n - dim.
inline GcvEstimate estimate_sigma2_gcv(const LassoPath& path, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  double best_gcv = 0.0;
  std::ptrdiff_t best = -1;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path.dims[k] >= static_cast<int>(n)) continue;
    const double rss = (y - path.fits[k]).squaredNorm();
    const double denom = 1.0 - path.dims[k] / n;
    const double gcv = rss / (denom * denom);
    if (best < 0 || gcv < best_gcv) {
      best_gcv = gcv;
      best = static_cast<std::ptrdiff_t>(k);
    }
  }
  if (best < 0)
    throw std::runtime_error("variance estimation failed: selection saturated (dim = n) on the whole grid");
  const auto kbest = static_cast<std::size_t>(best);
  GcvEstimate est;
  est.lambda_gcv = path.lambdas[kbest];
  est.sigma2_hat = (y - path.fits[kbest]).squaredNorm() / (n - path.dims[kbest]);
  return est;
}

}  // namespace pathdf
