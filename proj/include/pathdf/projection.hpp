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
#include <map>
#include <stdexcept>
#include <vector>

namespace pathdf {

inline constexpr double kRankTol = 1e-10;  // relative to the largest R diagonal

/// Orthogonal projection onto the span of a column subset, held as an
/// orthonormal basis. Immutable once built.
struct Projection {
  Eigen::MatrixXd basis;        // n x rank, orthonormal columns
  int rank = 0;
  std::vector<int> source_set;  // column indices (sorted)

  Eigen::VectorXd apply(const Eigen::VectorXd& y) const {
    if (rank == 0) return Eigen::VectorXd::Zero(y.size());
    return basis * (basis.transpose() * y);
  }
};

/// Orthonormal basis of col(X_A) via column-pivoted Householder QR; the
/// numerical rank uses pivots above kRankTol times the largest one.
inline Projection make_projection(const Eigen::MatrixXd& x, std::vector<int> active) {
  std::sort(active.begin(), active.end());
  for (int j : active)
    if (j < 0 || j >= x.cols()) throw std::out_of_range("projection: column index out of range");
  Projection proj;
  proj.source_set = active;
  const auto n = x.rows();
  if (active.empty()) {
    proj.basis = Eigen::MatrixXd::Zero(n, 0);
    proj.rank = 0;
    return proj;
  }
  Eigen::MatrixXd xa(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) xa.col(static_cast<Eigen::Index>(k)) = x.col(active[k]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xa);
  qr.setThreshold(kRankTol);
  const int r = static_cast<int>(qr.rank());
  proj.rank = r;
  proj.basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  return proj;
}

/// Rank of X restricted to a column subset.
inline int selection_dimension(const Eigen::MatrixXd& x, const std::vector<int>& active) {
  if (active.empty()) return 0;
  Eigen::MatrixXd xa(x.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) xa.col(static_cast<Eigen::Index>(k)) = x.col(active[k]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xa);
  qr.setThreshold(kRankTol);
  return static_cast<int>(qr.rank());
}

/// Per-active-set cache of projections. Adjacent grid points along a
/// regularization path frequently share their active set, so refits hit the
/// cache. Not thread safe; use one cache per worker.
class ProjectionCache {
 public:
  explicit ProjectionCache(const Eigen::MatrixXd& x) : x_(x) {}

  const Projection& get(std::vector<int> active) {
    std::sort(active.begin(), active.end());
    auto it = cache_.find(active);
    if (it != cache_.end()) return it->second;
    auto [pos, inserted] = cache_.emplace(active, make_projection(x_, active));
    return pos->second;
  }

  std::size_t size() const { return cache_.size(); }

 private:
  const Eigen::MatrixXd& x_;
  std::map<std::vector<int>, Projection> cache_;
};

/// Incremental least-squares refits along a sequence of active sets.
/// Maintains the Cholesky factor of the Gram block of the kept (linearly
/// independent) columns; preparing a superset of the previous set extends
/// the factor by the new columns, anything else rebuilds. Dependent columns
/// are skipped: they change neither the fit nor the rank, and their refit
/// coefficient is zero. Not thread safe.
class CholeskyRefit {
 public:
  CholeskyRefit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) : x_(x), y_(y) {
    factor_.resize(0, 0);
    basis_.resize(x_.rows(), 0);
  }

  void prepare(const std::vector<int>& active) {
    std::vector<int> sorted = active;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == prepared_) return;
    if (!std::includes(sorted.begin(), sorted.end(), prepared_.begin(), prepared_.end())) {
      kept_.clear();
      dependent_.clear();
      prepared_.clear();
      factor_.resize(0, 0);
      xty_kept_.resize(0);
      basis_.resize(x_.rows(), 0);
    }
    for (int j : sorted)
      if (!std::binary_search(prepared_.begin(), prepared_.end(), j)) add_column(j);
    prepared_ = std::move(sorted);
  }

  int rank() const { return static_cast<int>(kept_.size()); }

  /// Refit coefficients over the prepared active set (sorted order), zeros
  /// on dependent columns.
  Eigen::VectorXd coefficients() const {
    const Eigen::VectorXd b = solve_kept();
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prepared_.size()));
    for (std::size_t i = 0; i < kept_.size(); ++i) {
      const auto pos = std::lower_bound(prepared_.begin(), prepared_.end(), kept_[i]) -
                       prepared_.begin();
      coef[static_cast<Eigen::Index>(pos)] = b[static_cast<Eigen::Index>(i)];
    }
    return coef;
  }

  Eigen::VectorXd fitted() const {
    if (kept_.empty()) return Eigen::VectorXd::Zero(x_.rows());
    return basis_.leftCols(static_cast<Eigen::Index>(kept_.size())) * solve_kept();
  }

  bool full_rank() const { return kept_.size() == prepared_.size(); }

  /// Solves (X_A' X_A) b = X_A' y - shift over the prepared set; shift and
  /// the returned coefficients are in sorted prepared order (zeros on
  /// dependent columns).
  Eigen::VectorXd solve_shifted(const Eigen::VectorXd& shift) const {
    const auto m = static_cast<Eigen::Index>(kept_.size());
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prepared_.size()));
    if (m == 0) return coef;
    Eigen::VectorXd rhs(m);
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      pos[static_cast<std::size_t>(i)] =
          std::lower_bound(prepared_.begin(), prepared_.end(), kept_[static_cast<std::size_t>(i)]) -
          prepared_.begin();
      rhs[i] = xty_kept_[i] - shift[pos[static_cast<std::size_t>(i)]];
    }
    factor_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solveInPlace(rhs);
    factor_.topLeftCorner(m, m).triangularView<Eigen::Lower>().transpose().solveInPlace(rhs);
    for (Eigen::Index i = 0; i < m; ++i) coef[pos[static_cast<std::size_t>(i)]] = rhs[i];
    return coef;
  }

  const std::vector<int>& kept() const { return kept_; }

 private:
  void add_column(int j) {
    const Eigen::VectorXd col = x_.col(j);
    const auto m = static_cast<Eigen::Index>(kept_.size());
    Eigen::VectorXd w(m);
    if (m > 0) {
      const Eigen::VectorXd g = basis_.leftCols(m).transpose() * col;
      w = factor_.topLeftCorner(m, m)
              .triangularView<Eigen::Lower>()
              .solve(g);
    }
    const double sq = col.squaredNorm();
    const double d2 = sq - w.squaredNorm();
    const double tol = kRankTol * std::max(sq, 1.0);
    if (d2 <= tol) {
      dependent_.push_back(j);
      return;
    }
    if (factor_.rows() <= m) grow(m + 1);
    factor_.row(m).head(m) = w.transpose();
    factor_(m, m) = std::sqrt(d2);
    basis_.col(m) = col;
    xty_kept_.conservativeResize(m + 1);
    xty_kept_[m] = col.dot(y_);
    kept_.push_back(j);
  }

  Eigen::VectorXd solve_kept() const {
    const auto m = static_cast<Eigen::Index>(kept_.size());
    if (m == 0) return Eigen::VectorXd();
    Eigen::VectorXd b = factor_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(
        xty_kept_.head(m));
    factor_.topLeftCorner(m, m).triangularView<Eigen::Lower>().transpose().solveInPlace(b);
    return b;
  }

  void grow(Eigen::Index need) {
    const Eigen::Index cap = std::max<Eigen::Index>(need, 2 * std::max<Eigen::Index>(factor_.rows(), 8));
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(cap, cap);
    f.topLeftCorner(factor_.rows(), factor_.cols()) = factor_;
    factor_.swap(f);
    Eigen::MatrixXd b(x_.rows(), cap);
    b.leftCols(basis_.cols()) = basis_;
    basis_.swap(b);
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  std::vector<int> prepared_;   // sorted active set currently prepared
  std::vector<int> kept_;       // independent columns, insertion order
  std::vector<int> dependent_;
  Eigen::MatrixXd factor_;      // lower Cholesky factor of kept-gram
  Eigen::MatrixXd basis_;       // kept raw columns, insertion order
  Eigen::VectorXd xty_kept_;
};

/// sigma^2 * rank(X_A) with A = supp(beta): the risk of refitting least
/// squares on the true support.
inline double oracle_ols_risk(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                              double sigma) {
  std::vector<int> support;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) support.push_back(static_cast<int>(j));
  return sigma * sigma * selection_dimension(x, support);
}

}  // namespace pathdf
