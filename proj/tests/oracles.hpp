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

// Slow reference implementations used as independent oracles in tests. They
// deliberately avoid the algorithmic shortcuts of the library (coordinate
// descent, incremental factorizations, per-cardinality reduction).

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <random>
#include <vector>

namespace oracles {

inline double soft_threshold(double v, double lambda) {
  const double s = std::abs(v) - lambda;
  return s > 0.0 ? (v > 0.0 ? s : -s) : 0.0;
}

inline double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta, double lambda) {
  return 0.5 * (y - x * beta).squaredNorm() + lambda * beta.cwiseAbs().sum();
}

/// Proximal gradient (ISTA) with a conservative step; slow but a completely
/// independent route to the lasso optimum.
inline Eigen::VectorXd lasso_ista(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double lambda, int iterations = 200000) {
  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double step = 1.0 / (eig.eigenvalues().maxCoeff() + 1e-12);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = x.transpose() * (x * beta - y);
    for (Eigen::Index j = 0; j < beta.size(); ++j)
      beta[j] = soft_threshold(beta[j] - step * grad[j], step * lambda);
  }
  return beta;
}

inline int svd_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) ++r;
  return r;
}

inline Eigen::MatrixXd columns(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
  Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = x.col(idx[k]);
  return sub;
}

/// Projection of y onto col(X_A) through a fresh SVD.
inline Eigen::VectorXd project_svd(const Eigen::MatrixXd& x, const std::vector<int>& idx,
                                   const Eigen::VectorXd& y) {
  if (idx.empty()) return Eigen::VectorXd::Zero(y.size());
  const Eigen::MatrixXd sub = columns(x, idx);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(y.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] <= 1e-10 * sv[0]) break;
    const Eigen::VectorXd u = svd.matrixU().col(i);
    out += u * u.dot(y);
  }
  return out;
}

struct SubsetPick {
  std::vector<int> set;
  double objective = 0.0;
};

/// Plain enumeration of all subsets with the smaller-size-then-lexicographic
/// tie rule, scoring each via an SVD projection.
inline SubsetPick best_subset_bruteforce(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         double lambda) {
  const int p = static_cast<int>(x.cols());
  SubsetPick best;
  bool first = true;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    std::vector<int> set;
    for (int j = 0; j < p; ++j)
      if (mask & (1u << j)) set.push_back(j);
    const double obj =
        lambda * static_cast<double>(set.size()) - 0.5 * project_svd(x, set, y).squaredNorm();
    const bool better =
        first || obj < best.objective ||
        (obj == best.objective &&
         (set.size() < best.set.size() || (set.size() == best.set.size() && set < best.set)));
    if (better) {
      best.set = set;
      best.objective = obj;
      first = false;
    }
  }
  return best;
}

inline Eigen::MatrixXd random_matrix(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = gauss(rng);
  return x;
}

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

inline double sample_skewness(const Eigen::VectorXd& xs) {
  const double m = xs.mean();
  const double n = static_cast<double>(xs.size());
  double m2 = 0.0, m3 = 0.0;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const double c = xs[i] - m;
    m2 += c * c;
    m3 += c * c * c;
  }
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

/// Skewness of the skew-normal distribution with the given shape parameter.
inline double skew_normal_skewness(double shape) {
  const double delta = shape / std::sqrt(1.0 + shape * shape);
  const double b = std::sqrt(2.0 / M_PI);
  const double num = (4.0 - M_PI) / 2.0 * std::pow(delta * b, 3.0);
  const double den = std::pow(1.0 - 2.0 * delta * delta / M_PI, 1.5);
  return num / den;
}

}  // namespace oracles
