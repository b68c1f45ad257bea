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

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathdf/projection.hpp"

namespace pathdf {

struct GridSpec {
  int n_lambda = 100;
  double ratio = 0.0;            // lambda_min/lambda_max; 0 = auto (1e-3, 1e-2 if p > n)
  std::vector<double> lambdas;   // explicit decreasing grid, overrides the above
};

struct LassoSettings {
  double kkt_rel_tol = 1e-6;
  double kkt_abs_tol = 1e-8;
  double coef_tol = 1e-10;       // per-sweep max coefficient change, times ||y||_2
  int max_sweeps = 100000;
};

inline double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * y).cwiseAbs().maxCoeff();
}

inline std::vector<double> make_lambda_grid(const Eigen::MatrixXd& x,
                                            const Eigen::VectorXd& y,
                                            const GridSpec& spec) {
  if (!spec.lambdas.empty()) {
    for (std::size_t k = 0; k < spec.lambdas.size(); ++k) {
      if (!(spec.lambdas[k] > 0.0)) throw std::invalid_argument("lambda grid must be positive");
      if (k > 0 && !(spec.lambdas[k] < spec.lambdas[k - 1]))
        throw std::invalid_argument("lambda grid must be strictly decreasing");
    }
    if (spec.lambdas.size() < 2) throw std::invalid_argument("lambda grid needs at least 2 points");
    return spec.lambdas;
  }
  if (spec.n_lambda < 2) throw std::invalid_argument("lambda grid needs at least 2 points");
  const double lmax = lambda_max(x, y);
  if (!(lmax > 0.0))
    throw std::invalid_argument("response is orthogonal to the design; lambda grid undefined");
  double ratio = spec.ratio;
  if (!(ratio > 0.0)) ratio = (x.cols() > x.rows()) ? 1e-2 : 1e-3;
  if (!(ratio < 1.0)) throw std::invalid_argument("grid ratio must be in (0, 1)");
  std::vector<double> grid(static_cast<std::size_t>(spec.n_lambda));
  const double log_max = std::log(lmax);
  const double step = std::log(ratio) / (spec.n_lambda - 1);
  for (int k = 0; k < spec.n_lambda; ++k) grid[static_cast<std::size_t>(k)] = std::exp(log_max + step * k);
  grid.front() = lmax;  // exact, so the first path point is the all-zero solution
  return grid;
}

struct KktReport {
  double max_abs_gradient = 0.0;  // max_j |X_j'(y - X beta)|
  double max_sign_violation = 0.0;  // max over active j of |X_j'(y - X beta) - lambda sign(beta_j)|
  bool ok = false;
};

/// Stationarity certificate for 0.5||y - X b||^2 + lambda ||b||_1.
inline KktReport kkt_certificate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& beta, double lambda,
                                 const LassoSettings& settings = {}) {
  const Eigen::VectorXd grad = x.transpose() * (y - x * beta);
  KktReport report;
  report.max_abs_gradient = grad.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] == 0.0) continue;
    const double s = beta[j] > 0.0 ? 1.0 : -1.0;
    report.max_sign_violation = std::max(report.max_sign_violation, std::abs(grad[j] - lambda * s));
  }
  report.ok = report.max_abs_gradient <= lambda * (1.0 + settings.kkt_rel_tol) + settings.kkt_abs_tol &&
              report.max_sign_violation <= lambda * settings.kkt_rel_tol + settings.kkt_abs_tol;
  return report;
}

class LassoError : public std::runtime_error {
 public:
  LassoError(const std::string& what, double kkt_residual)
      : std::runtime_error(what), kkt_residual_(kkt_residual) {}
  double kkt_residual() const { return kkt_residual_; }

 private:
  double kkt_residual_;
};

/// Cyclic coordinate descent bound to one (X, y) problem, with active-set
/// iteration and stationarity-scan stopping. Two gradient strategies:
/// covariance updates through cached Gram columns when p is moderate (inner
/// products are reused across a warm-started lambda sequence), and residual
/// updates when p >> n, where maintaining a length-p gradient per coordinate
/// step would dominate. Not thread safe; solve independent problems on
/// independent solvers.
class LassoSolver {
 public:
  LassoSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, LassoSettings settings = {})
      : x_(x),
        y_(y),
        settings_(settings),
        xty_(x.transpose() * y),
        col_sqnorm_(x.colwise().squaredNorm().transpose()),
        covariance_mode_(x.cols() <= 2 * x.rows()),
        beta_(Eigen::VectorXd::Zero(x.cols())),
        gram_(covariance_mode_ ? static_cast<std::size_t>(x.cols()) : 0) {
    if (x.rows() != y.size()) throw std::invalid_argument("lasso: X rows must match y length");
    coef_tol_abs_ = settings_.coef_tol * y.norm();
    if (covariance_mode_)
      gradient_ = xty_;
    else
      residual_ = y_;
  }

  void reset(const Eigen::VectorXd& beta0) {
    if (beta0.size() != beta_.size()) throw std::invalid_argument("lasso: warm start has wrong length");
    beta_ = beta0;
    active_.clear();
    for (Eigen::Index j = 0; j < beta_.size(); ++j)
      if (beta_[j] != 0.0) active_.push_back(static_cast<int>(j));
    sync_state();
  }

  /// Minimizes at the given lambda from the current coefficients.
  const Eigen::VectorXd& solve(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lasso: lambda must be positive");
    sync_state();
    int sweeps = 0;
    int round = 0;
    while (true) {
      // Stationarity scan; violators of the new penalty join the active set.
      const Eigen::VectorXd grad = full_gradient();
      const bool added = admit_violators(grad, lambda);
      if (!added && gradient_kkt_ok(grad, lambda)) break;
      // A few descent passes settle the signs of freshly admitted
      // coordinates; the direct active-block solve then finishes the point.
      // Long in-budget cycling only pays off once refinement keeps failing.
      const int inner_budget = round == 0 ? 3 : round == 1 ? 8 : 50;
      double max_delta = 0.0;
      for (int pass = 0; pass < inner_budget; ++pass) {
        max_delta = 0.0;
        for (int j : active_) max_delta = std::max(max_delta, update_coordinate(j, lambda));
        if (++sweeps > settings_.max_sweeps) fail(lambda);
        if (max_delta <= coef_tol_abs_) break;
      }
      prune_active();
      if (refine_active_block(lambda)) break;
      ++round;
    }
    prune_active();
    return beta_;
  }

  const Eigen::VectorXd& coefficients() const { return beta_; }

  std::vector<int> active_set() const {
    std::vector<int> a = active_;
    std::sort(a.begin(), a.end());
    return a;
  }

 private:
  void fail(double lambda) {
    const auto report = kkt_certificate(x_, y_, beta_, lambda, settings_);
    throw LassoError("lasso did not converge within " + std::to_string(settings_.max_sweeps) +
                         " sweeps (KKT residual " + std::to_string(report.max_abs_gradient) + ")",
                     report.max_abs_gradient);
  }

  const Eigen::VectorXd& gram_col(int j) {
    auto& col = gram_[static_cast<std::size_t>(j)];
    if (col.size() == 0) col = x_.transpose() * x_.col(j);
    return col;
  }

  // Rebuild the maintained state from beta; kills accumulation drift
  // between grid points.
  void sync_state() {
    if (covariance_mode_) {
      gradient_ = xty_;
      for (int j : active_)
        if (beta_[j] != 0.0) gradient_.noalias() -= beta_[j] * gram_col(j);
    } else {
      residual_ = y_;
      for (int j : active_)
        if (beta_[j] != 0.0) residual_.noalias() -= beta_[j] * x_.col(j);
    }
  }

  double coordinate_gradient(int j) const {
    return covariance_mode_ ? gradient_[j] : x_.col(j).dot(residual_);
  }

  Eigen::VectorXd full_gradient() const {
    return covariance_mode_ ? gradient_ : Eigen::VectorXd(x_.transpose() * residual_);
  }

  double update_coordinate(int j, double lambda) {
    const double sq = col_sqnorm_[j];
    if (sq <= 0.0) return 0.0;
    const double u = coordinate_gradient(j) + sq * beta_[j];
    const double shrunk = std::abs(u) - lambda;
    const double next = shrunk > 0.0 ? (u > 0.0 ? shrunk : -shrunk) / sq : 0.0;
    const double delta = next - beta_[j];
    if (delta == 0.0) return 0.0;
    if (covariance_mode_)
      gradient_.noalias() -= delta * gram_col(j);
    else
      residual_.noalias() -= delta * x_.col(j);
    beta_[j] = next;
    return std::abs(delta);
  }

  bool admit_violators(const Eigen::VectorXd& grad, double lambda) {
    bool any = false;
    for (Eigen::Index j = 0; j < beta_.size(); ++j) {
      if (beta_[j] != 0.0) continue;
      if (std::abs(grad[j]) > lambda) {
        active_.push_back(static_cast<int>(j));
        beta_[j] = 0.0;
        any = true;
      }
    }
    return any;
  }

  void prune_active() {
    std::erase_if(active_, [&](int j) { return beta_[j] == 0.0; });
  }

  bool gradient_kkt_ok(const Eigen::VectorXd& grad, double lambda) const {
    const double bound = lambda * (1.0 + settings_.kkt_rel_tol) + settings_.kkt_abs_tol;
    const double sign_bound = lambda * settings_.kkt_rel_tol + settings_.kkt_abs_tol;
    for (Eigen::Index j = 0; j < beta_.size(); ++j) {
      if (std::abs(grad[j]) > bound) return false;
      if (beta_[j] != 0.0 &&
          std::abs(grad[j] - lambda * (beta_[j] > 0.0 ? 1.0 : -1.0)) > sign_bound)
        return false;
    }
    return true;
  }

  // Solves X_A' X_A b = X_A' y - lambda * sign(beta_A) for the current
  // nonzero coordinates and accepts the result when the signs survive and
  // the full certificate holds. The factorization is shared incrementally
  // across calls, so a repeated sign pattern costs only triangular solves.
  bool refine_active_block(double lambda) {
    std::vector<int> support;
    for (int j : active_)
      if (beta_[j] != 0.0) support.push_back(j);
    if (support.empty()) return false;
    std::sort(support.begin(), support.end());
    if (!refit_) refit_.emplace(x_, y_);
    refit_->prepare(support);
    if (!refit_->full_rank()) return false;
    const auto m = static_cast<Eigen::Index>(support.size());
    Eigen::VectorXd shift(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const int ja = support[static_cast<std::size_t>(a)];
      shift[a] = lambda * (beta_[ja] > 0.0 ? 1.0 : -1.0);
    }
    const Eigen::VectorXd refined = refit_->solve_shifted(shift);
    for (Eigen::Index a = 0; a < m; ++a) {
      const int ja = support[static_cast<std::size_t>(a)];
      if (refined[a] * beta_[ja] <= 0.0) return false;  // sign flipped or vanished
    }
    Eigen::VectorXd residual = y_;
    for (Eigen::Index a = 0; a < m; ++a)
      residual.noalias() -= refined[a] * x_.col(support[static_cast<std::size_t>(a)]);
    const Eigen::VectorXd grad = x_.transpose() * residual;
    const double bound = lambda * (1.0 + settings_.kkt_rel_tol) + settings_.kkt_abs_tol;
    const double sign_bound = lambda * settings_.kkt_rel_tol + settings_.kkt_abs_tol;
    for (Eigen::Index a = 0, j = 0; j < static_cast<Eigen::Index>(beta_.size()); ++j) {
      if (a < m && support[static_cast<std::size_t>(a)] == j) {
        if (std::abs(grad[j] - lambda * (refined[a] > 0.0 ? 1.0 : -1.0)) > sign_bound) return false;
        ++a;
      } else if (std::abs(grad[j]) > bound) {
        return false;
      }
    }
    beta_.setZero();
    for (Eigen::Index a = 0; a < m; ++a) beta_[support[static_cast<std::size_t>(a)]] = refined[a];
    active_ = std::move(support);
    if (covariance_mode_)
      gradient_ = grad;
    else
      residual_ = std::move(residual);
    return true;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  LassoSettings settings_;
  Eigen::VectorXd xty_;
  Eigen::VectorXd col_sqnorm_;
  bool covariance_mode_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd gradient_;  // covariance mode: X'(y - X beta)
  Eigen::VectorXd residual_;  // residual mode: y - X beta
  std::vector<Eigen::VectorXd> gram_;
  std::vector<int> active_;
  std::optional<CholeskyRefit> refit_;
  double coef_tol_abs_ = 0.0;
};

inline Eigen::VectorXd solve_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   double lambda,
                                   const std::optional<Eigen::VectorXd>& warm_start = {},
                                   const LassoSettings& settings = {}) {
  LassoSolver solver(x, y, settings);
  if (warm_start) solver.reset(*warm_start);
  return solver.solve(lambda);
}

/// Solution path over a decreasing lambda grid.
struct LassoPath {
  std::vector<double> lambdas;
  std::vector<Eigen::VectorXd> coefs;        // per lambda, length p
  std::vector<std::vector<int>> active_sets; // supp(beta), sorted
  std::vector<int> dims;                     // rank of the selected column block
  std::vector<Eigen::VectorXd> fits;         // X beta per lambda
  std::vector<double> objectives;
  Eigen::Index n = 0, p = 0;

  std::size_t size() const { return lambdas.size(); }
  std::vector<double> log_lambdas() const {
    std::vector<double> d(lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k) d[k] = std::log(lambdas[k]);
    return d;
  }
};

/// Computes the lasso path from the largest grid value down, warm-starting
/// each point at the previous solution. Selection dimensions are ranks of
/// the active column blocks (equal to the support size for designs in
/// general position).
inline LassoPath compute_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const GridSpec& grid, const LassoSettings& settings = {}) {
  LassoPath path;
  path.lambdas = make_lambda_grid(x, y, grid);
  path.n = x.rows();
  path.p = x.cols();
  const std::size_t n_grid = path.lambdas.size();
  path.coefs.reserve(n_grid);
  path.active_sets.reserve(n_grid);
  path.dims.reserve(n_grid);
  path.fits.reserve(n_grid);
  path.objectives.reserve(n_grid);

  LassoSolver solver(x, y, settings);
  CholeskyRefit rank_engine(x, y);
  for (double lambda : path.lambdas) {
    const Eigen::VectorXd& beta = solver.solve(lambda);
    std::vector<int> active = solver.active_set();
    Eigen::VectorXd fit = Eigen::VectorXd::Zero(x.rows());
    double l1 = 0.0;
    for (int j : active) {
      fit.noalias() += beta[j] * x.col(j);
      l1 += std::abs(beta[j]);
    }
    rank_engine.prepare(active);
    path.dims.push_back(rank_engine.rank());
    path.objectives.push_back(0.5 * (y - fit).squaredNorm() + lambda * l1);
    path.coefs.push_back(beta);
    path.active_sets.push_back(std::move(active));
    path.fits.push_back(std::move(fit));
  }
  return path;
}

/// Least-squares refit along a path: projects y onto the span selected at
/// each grid point.
inline std::vector<Eigen::VectorXd> lasso_ols_fit(const Eigen::MatrixXd& x,
                                                  const Eigen::VectorXd& y,
                                                  const LassoPath& path) {
  CholeskyRefit refit(x, y);
  std::vector<Eigen::VectorXd> fits;
  fits.reserve(path.size());
  for (const auto& active : path.active_sets) {
    refit.prepare(active);
    fits.push_back(refit.fitted());
  }
  return fits;
}

struct ScalingCheck {
  bool ok = false;
  bool active_sets_equal = false;
  double max_coef_diff = 0.0;   // || beta^lambda(lambda y) - lambda beta^1(y) ||_inf
  double tolerance = 0.0;
};

/// The l1 penalty is positive homogeneous of degree one, so scaling the data
/// by lambda while moving the penalty from 1 to lambda rescales the solution
/// by lambda and preserves the active set.
inline ScalingCheck check_scaling_property(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                           double lambda, const LassoSettings& settings = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scaling check: lambda must be positive");
  LassoSolver base(x, y, settings);
  const Eigen::VectorXd beta_unit = base.solve(1.0);
  const std::vector<int> active_unit = base.active_set();
  const Eigen::VectorXd y_scaled = lambda * y;
  LassoSolver scaled(x, y_scaled, settings);
  const Eigen::VectorXd beta_scaled = scaled.solve(lambda);
  const std::vector<int> active_scaled = scaled.active_set();

  ScalingCheck check;
  check.active_sets_equal = active_unit == active_scaled;
  check.max_coef_diff = (beta_scaled - lambda * beta_unit).cwiseAbs().maxCoeff();
  check.tolerance = 1e-8 * std::max(1.0, lambda * beta_unit.cwiseAbs().maxCoeff());
  check.ok = check.active_sets_equal && check.max_coef_diff <= check.tolerance;
  return check;
}

}  // namespace pathdf
