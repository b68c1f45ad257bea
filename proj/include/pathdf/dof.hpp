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
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pathdf/lasso.hpp"
#include "pathdf/stats.hpp"

namespace pathdf {

/// Jumps of the running infimum of the selection dimension along a
/// decreasing lambda grid, located in delta = log(lambda).
struct JumpRecord {
  std::vector<double> deltas;      // jump locations log(lambda_i)
  std::vector<int> multiplicities; // jump sizes, >= 1
  int total = 0;                   // sum of multiplicities
};

/// Running-infimum transform of a dimension sequence given in decreasing
/// lambda order: level(k) = min(dims[k], ..., dims.back()), the infimum of
/// the dimension over penalties at or below the k-th grid point. The
/// transform is nondecreasing as lambda decreases and discards positive
/// excursions of the raw step function.
inline std::vector<int> running_infimum(const std::vector<int>& dims) {
  std::vector<int> level(dims.size());
  int running = dims.empty() ? 0 : dims.back();
  for (std::size_t k = dims.size(); k-- > 0;) {
    running = std::min(running, dims[k]);
    level[k] = running;
  }
  return level;
}

/// Records a jump at every grid point where the running infimum increases as
/// lambda decreases, with the increase as its multiplicity (grid jumps can
/// exceed one). The crossing itself lies somewhere between the grid point
/// and its larger neighbour, so it is located at the log-midpoint of that
/// interval, which halves the discretization bias of the location estimate.
/// A constant dimension sequence yields an empty record.
inline JumpRecord extract_jumps(const std::vector<double>& lambdas,
                                const std::vector<int>& dims) {
  if (lambdas.empty() || lambdas.size() != dims.size())
    throw std::invalid_argument("extract_jumps: lambda/dimension size mismatch");
  const std::vector<int> level = running_infimum(dims);
  JumpRecord record;
  for (std::size_t k = 1; k < level.size(); ++k) {
    const int rise = level[k] - level[k - 1];
    if (rise > 0) {
      record.deltas.push_back(0.5 * (std::log(lambdas[k]) + std::log(lambdas[k - 1])));
      record.multiplicities.push_back(rise);
      record.total += rise;
    }
  }
  return record;
}

inline JumpRecord extract_jumps(const LassoPath& path) {
  return extract_jumps(path.lambdas, path.dims);
}

/// Bandwidth knobs for the adaptive smoother. Defaults: Silverman pilot,
/// Abramson square-root sensitivity, and a floor bandwidth of
/// 0.1 * (grid range) / sqrt(total) for degenerate samples.
struct KdeConfig {
  double pilot_factor = 0.9;
  double sensitivity = 0.5;
  double floor_scale = 0.1;
  double degenerate_sd = 1e-8;
  // Cap on the local bandwidth inflation (g / pilot)^sensitivity. Isolated
  // tail jumps otherwise receive near-unbounded bandwidths and smear their
  // mass across the whole grid.
  double max_bandwidth_factor = 5.0;
};

namespace detail {

inline double gauss_kernel(double u, double h) {
  const double z = u / h;
  return std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace detail

/// Adaptive Gaussian kernel estimate of the jump intensity, evaluated on
/// `eval_deltas` and rescaled by the total number of jumps:
///   1. fixed-bandwidth pilot with Silverman's rule on the weighted sample,
///   2. local bandwidths h_i = h0 * (g / pilot(delta_i))^(1/2) with g the
///      weighted geometric mean of the pilot densities,
///   3. weighted mixture of the local kernels, times the jump total.
inline Eigen::VectorXd smooth_jumps(const JumpRecord& record,
                                    const std::vector<double>& eval_deltas,
                                    const KdeConfig& config = {}) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eval_deltas.size()));
  if (record.total < 1) return out;
  const std::size_t m = record.deltas.size();
  const double total = static_cast<double>(record.total);

  std::vector<double> weights(m);
  for (std::size_t i = 0; i < m; ++i) weights[i] = static_cast<double>(record.multiplicities[i]);

  double wmean = 0.0;
  for (std::size_t i = 0; i < m; ++i) wmean += weights[i] * record.deltas[i];
  wmean /= total;
  double wvar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = record.deltas[i] - wmean;
    wvar += weights[i] * c * c;
  }
  wvar = total > 1.0 ? wvar / (total - 1.0) : 0.0;
  const double wsd = std::sqrt(wvar);

  double pilot_bw;
  if (wsd < config.degenerate_sd) {
    double lo = eval_deltas.empty() ? 0.0 : eval_deltas.front();
    double hi = lo;
    for (double d : eval_deltas) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    double range = hi - lo;
    if (!(range > 0.0)) range = 1.0;
    pilot_bw = config.floor_scale * range / std::sqrt(total);
  } else {
    double spread = wsd;
    const double iqr = weighted_quantile(record.deltas, weights, 0.75) -
                       weighted_quantile(record.deltas, weights, 0.25);
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    pilot_bw = config.pilot_factor * spread * std::pow(total, -0.2);
  }

  // Pilot density at the sample points.
  std::vector<double> pilot(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      f += weights[j] * detail::gauss_kernel(record.deltas[i] - record.deltas[j], pilot_bw);
    pilot[i] = f / total;
  }
  double log_gmean = 0.0;
  for (std::size_t i = 0; i < m; ++i) log_gmean += weights[i] * std::log(pilot[i]);
  const double gmean = std::exp(log_gmean / total);

  std::vector<double> local_bw(m);
  for (std::size_t i = 0; i < m; ++i)
    local_bw[i] = pilot_bw * std::min(std::pow(gmean / pilot[i], config.sensitivity),
                                      config.max_bandwidth_factor);

  for (Eigen::Index k = 0; k < out.size(); ++k) {
    double f = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      f += weights[i] * detail::gauss_kernel(eval_deltas[static_cast<std::size_t>(k)] - record.deltas[i],
                                             local_bw[i]);
    out[k] = f;  // (f / total) * total
  }
  return out;
}

enum class DfMethod { LassoOLS, BestSubset };

/// Degrees-of-freedom estimate along a path: the selection dimension plus
/// the smoothed jump correction (doubled for best subset selection).
struct DfEstimate {
  std::vector<double> lambdas;
  Eigen::VectorXd df_dim;      // dim of the selected span per lambda
  Eigen::VectorXd correction;  // smoothed jump intensity at log(lambda)
  Eigen::VectorXd df;          // df_dim + multiplier * correction
  double multiplier = 1.0;
};

inline DfEstimate estimate_df(const std::vector<double>& lambdas, const std::vector<int>& dims,
                              DfMethod method, const KdeConfig& config = {}) {
  DfEstimate est;
  est.lambdas = lambdas;
  est.multiplier = method == DfMethod::BestSubset ? 2.0 : 1.0;
  const auto n_grid = static_cast<Eigen::Index>(lambdas.size());
  est.df_dim.resize(n_grid);
  for (Eigen::Index k = 0; k < n_grid; ++k) est.df_dim[k] = dims[static_cast<std::size_t>(k)];
  std::vector<double> deltas(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) deltas[k] = std::log(lambdas[k]);
  est.correction = smooth_jumps(extract_jumps(lambdas, dims), deltas, config);
  est.df = est.df_dim + est.multiplier * est.correction;
  return est;
}

inline DfEstimate estimate_df(const LassoPath& path, DfMethod method,
                              const KdeConfig& config = {}) {
  return estimate_df(path.lambdas, path.dims, method, config);
}

}  // namespace pathdf
