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
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pathdf/lasso.hpp"
#include "pathdf/projection.hpp"
#include "pathdf/rng.hpp"
#include "pathdf/stats.hpp"

namespace pathdf {

inline constexpr int kSubsetPMax = 20;

/// Result of exhaustive subset scoring, reduced per cardinality: among all
/// subsets of a given size, only the one with the largest squared projection
/// norm (ties to the lexicographically smallest index set) can ever win the
/// penalized comparison, for any penalty.
struct SubsetScores {
  int p = 0;
  std::vector<double> proj_sq;         // best ||proj_A y||^2 per cardinality
  std::vector<std::vector<int>> sets;  // achieving subset per cardinality
};

/// Scores all 2^p column subsets by depth-first search, growing and
/// shrinking an orthonormal basis as a stack so each inclusion costs one
/// Gram-Schmidt step and each exclusion is a pop.
inline SubsetScores enumerate_subsets(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      int p_max = kSubsetPMax) {
  const int p = static_cast<int>(x.cols());
  if (p > p_max)
    throw std::invalid_argument("best subset enumeration limited to p <= " + std::to_string(p_max));
  if (x.rows() != y.size()) throw std::invalid_argument("best subset: X rows must match y length");

  SubsetScores scores;
  scores.p = p;
  scores.proj_sq.assign(static_cast<std::size_t>(p) + 1, -1.0);
  scores.sets.resize(static_cast<std::size_t>(p) + 1);

  const auto n = x.rows();
  Eigen::MatrixXd basis(n, p);  // orthonormal stack, columns [0, rank)
  std::vector<int> current;
  current.reserve(static_cast<std::size_t>(p));

  auto offer = [&](double proj_sq) {
    const auto c = current.size();
    double& best = scores.proj_sq[c];
    auto& set = scores.sets[c];
    if (proj_sq > best || (proj_sq == best && current < set)) {
      best = proj_sq;
      set = current;
    }
  };

  // Iterative DFS over columns; state per depth: next column to branch on.
  std::function<void(int, int, double)> walk = [&](int col, int rank, double proj_sq) {
    if (col == p) {
      offer(proj_sq);
      return;
    }
    walk(col + 1, rank, proj_sq);
    // Include `col`: orthogonalize against the basis stack, with one
    // reorthogonalization pass to keep the stack numerically orthonormal.
    Eigen::VectorXd v = x.col(col);
    const double scale = v.norm();
    if (rank > 0) {
      auto q = basis.leftCols(rank);
      v.noalias() -= q * (q.transpose() * v);
      v.noalias() -= q * (q.transpose() * v);
    }
    const double res = v.norm();
    current.push_back(col);
    if (res > kRankTol * std::max(scale, 1.0)) {
      basis.col(rank) = v / res;
      const double gain = basis.col(rank).dot(y);
      walk(col + 1, rank + 1, proj_sq + gain * gain);
    } else {
      walk(col + 1, rank, proj_sq);  // redundant column: set grows, span does not
    }
    current.pop_back();
  };
  walk(0, 0, 0.0);
  return scores;
}

/// Lagrangian best subset solution: minimizes lambda*|A| - 0.5*||proj_A y||^2
/// over all subsets, ties resolved toward smaller |A| and then
/// lexicographically.
struct SubsetSolution {
  double lambda = 0.0;
  std::vector<int> best_set;
  double objective = 0.0;
  Eigen::VectorXd fitted;
};

inline std::size_t best_cardinality(const SubsetScores& scores, double lambda) {
  std::size_t best = 0;
  double best_obj = -0.5 * scores.proj_sq[0];
  for (std::size_t c = 1; c <= static_cast<std::size_t>(scores.p); ++c) {
    const double obj = lambda * static_cast<double>(c) - 0.5 * scores.proj_sq[c];
    if (obj < best_obj) {
      best_obj = obj;
      best = c;
    }
  }
  return best;
}

inline SubsetSolution pick_best_subset(const SubsetScores& scores, const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("best subset: lambda must be positive");
  const std::size_t c = best_cardinality(scores, lambda);
  SubsetSolution solution;
  solution.lambda = lambda;
  solution.best_set = scores.sets[c];
  solution.objective = lambda * static_cast<double>(c) - 0.5 * scores.proj_sq[c];
  solution.fitted = make_projection(x, solution.best_set).apply(y);
  return solution;
}

inline SubsetSolution solve_best_subset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        double lambda, int p_max = kSubsetPMax) {
  return pick_best_subset(enumerate_subsets(x, y, p_max), x, y, lambda);
}

/// Best subset solutions over a decreasing lambda grid. The exhaustive
/// scores are computed once and shared across grid points.
struct SubsetPath {
  std::vector<double> lambdas;
  std::vector<std::vector<int>> active_sets;
  std::vector<int> dims;
  std::vector<Eigen::VectorXd> fits;
  std::vector<double> objectives;

  std::size_t size() const { return lambdas.size(); }
};

inline SubsetPath compute_subset_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const std::vector<double>& lambdas,
                                      ProjectionCache* cache = nullptr, int p_max = kSubsetPMax) {
  const SubsetScores scores = enumerate_subsets(x, y, p_max);
  std::optional<ProjectionCache> local_cache;
  if (cache == nullptr) {
    local_cache.emplace(x);
    cache = &*local_cache;
  }
  SubsetPath path;
  path.lambdas = lambdas;
  path.active_sets.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw std::invalid_argument("best subset: lambda must be positive");
    const std::size_t c = best_cardinality(scores, lambda);
    const Projection& proj = cache->get(scores.sets[c]);
    path.active_sets.push_back(scores.sets[c]);
    path.dims.push_back(proj.rank);
    path.fits.push_back(proj.apply(y));
    path.objectives.push_back(lambda * static_cast<double>(c) - 0.5 * scores.proj_sq[c]);
  }
  return path;
}

/// Scaling law for the l0 penalty (positive homogeneous of degree zero):
/// scaling the data by sqrt(lambda) while moving the penalty from 1 to
/// lambda leaves the selected set unchanged.
struct SubsetScalingCheck {
  bool ok = false;
  std::vector<int> set_unit;
  std::vector<int> set_scaled;
};

inline SubsetScalingCheck check_scaling_property_best_subset(const Eigen::MatrixXd& x,
                                                             const Eigen::VectorXd& y,
                                                             double lambda,
                                                             int p_max = kSubsetPMax) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scaling check: lambda must be positive");
  SubsetScalingCheck check;
  check.set_unit = solve_best_subset(x, y, 1.0, p_max).best_set;
  check.set_scaled =
      solve_best_subset(x, Eigen::VectorXd(std::sqrt(lambda) * y), lambda, p_max).best_set;
  check.ok = check.set_unit == check.set_scaled;
  return check;
}

enum class RegionEstimator { Lasso, BestSubset };

/// Active set of the requested estimator at a point of the plane, as a
/// bitmask (bit 0: first variable, bit 1: second). Boundary points receive
/// the solver's deterministic tie-rule label.
inline int classify_region_2d(const Eigen::MatrixXd& x, double lambda, double y1, double y2,
                              RegionEstimator method) {
  if (x.rows() != 2 || x.cols() != 2)
    throw std::invalid_argument("region classification requires a 2x2 design");
  Eigen::VectorXd y(2);
  y << y1, y2;
  std::vector<int> active;
  if (method == RegionEstimator::Lasso) {
    const Eigen::VectorXd beta = solve_lasso(x, y, lambda);
    for (int j = 0; j < 2; ++j)
      if (beta[j] != 0.0) active.push_back(j);
  } else {
    active = solve_best_subset(x, y, lambda).best_set;
  }
  int mask = 0;
  for (int j : active) mask |= 1 << j;
  return mask;
}

/// Region labels over a rectangular grid of response points, row index along
/// ys1 and column index along ys2.
inline Eigen::MatrixXi classify_region_grid(const Eigen::MatrixXd& x, double lambda,
                                            const std::vector<double>& ys1,
                                            const std::vector<double>& ys2,
                                            RegionEstimator method) {
  Eigen::MatrixXi labels(static_cast<Eigen::Index>(ys1.size()),
                         static_cast<Eigen::Index>(ys2.size()));
  for (std::size_t i = 0; i < ys1.size(); ++i)
    for (std::size_t j = 0; j < ys2.size(); ++j)
      labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          classify_region_2d(x, lambda, ys1[i], ys2[j], method);
  return labels;
}

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
  int n_reps = 0;
};

/// Monte Carlo estimate of the covariance form of degrees of freedom,
/// (1/sigma^2) E <y - mu, muhat(y)>, with its standard error.
inline McEstimate mc_df_covariance(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& estimator,
    const Eigen::VectorXd& mu, double sigma, int n_reps, std::uint64_t seed) {
  if (n_reps < 2) throw std::invalid_argument("df covariance needs at least 2 replications");
  const auto n = mu.size();
  std::vector<double> stats(static_cast<std::size_t>(n_reps));
  for (int r = 0; r < n_reps; ++r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> gauss(0.0, sigma);
    Eigen::VectorXd noise(n);
    for (Eigen::Index i = 0; i < n; ++i) noise[i] = gauss(rng);
    const Eigen::VectorXd y = mu + noise;
    stats[static_cast<std::size_t>(r)] = noise.dot(estimator(y)) / (sigma * sigma);
  }
  const auto ms = mean_se(stats);
  return {ms.value, ms.se, n_reps};
}

}  // namespace pathdf
