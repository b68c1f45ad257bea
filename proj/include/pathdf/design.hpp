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
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathdf/csv.hpp"
#include "pathdf/rng.hpp"

namespace pathdf {

enum class DesignType { Orthogonal, SimulatedAR, SimulatedConstCorr, Empirical };

inline const char* to_string(DesignType t) {
  switch (t) {
    case DesignType::Orthogonal: return "orthogonal";
    case DesignType::SimulatedAR: return "simulated_ar";
    case DesignType::SimulatedConstCorr: return "simulated_const_corr";
    case DesignType::Empirical: return "empirical";
  }
  return "?";
}

struct DesignSpec {
  DesignType type = DesignType::Orthogonal;
  int n = 0;
  int p = 0;
  double rho = 0.0;              // correlation, ignored for Orthogonal/Empirical
  std::string empirical_source;  // CSV path for Empirical
  bool source_has_header = false;

  void validate() const {
    if (n <= 0 || p <= 0) throw std::invalid_argument("design: n and p must be positive");
    switch (type) {
      case DesignType::Orthogonal:
        if (n != p) throw std::invalid_argument("orthogonal design requires n == p");
        break;
      case DesignType::SimulatedAR:
      case DesignType::SimulatedConstCorr:
        if (!(rho >= 0.0 && rho < 1.0))
          throw std::invalid_argument("simulated design requires rho in [0, 1)");
        break;
      case DesignType::Empirical:
        if (empirical_source.empty())
          throw std::invalid_argument("empirical design requires a source file");
        break;
    }
  }
};

struct BetaSpec {
  double gamma = 1.0;  // geometric signal decay, in (0, 1]
  double alpha = 0.0;  // support fraction, in [0, 1]

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("beta: gamma must be in (0, 1]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("beta: alpha must be in [0, 1]");
  }
};

enum class NoiseKind { Gaussian, StudentT3, SkewNormal3 };

inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::StudentT3: return "student_t3";
    case NoiseKind::SkewNormal3: return "skew_normal3";
  }
  return "?";
}

struct NoiseModel {
  NoiseKind kind = NoiseKind::Gaussian;
  double sigma = 1.0;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("noise: sigma must be positive");
  }
};

/// ceil(n * alpha) guarded against cases like 100 * 0.1 landing a hair above
/// the integer it represents.
inline int support_size(int n, double alpha) {
  return static_cast<int>(std::ceil(static_cast<double>(n) * alpha - 1e-9));
}

/// Coefficients beta_i = gamma^(i-1) on the first ceil(n*alpha) entries,
/// zero elsewhere.
inline Eigen::VectorXd build_beta(const BetaSpec& spec, int n, int p) {
  spec.validate();
  const int s = support_size(n, spec.alpha);
  if (s > p)
    throw std::invalid_argument("beta support " + std::to_string(s) +
                                " exceeds p = " + std::to_string(p));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double v = 1.0;
  for (int i = 0; i < s; ++i) {
    beta[i] = v;
    v *= spec.gamma;
  }
  return beta;
}

namespace detail {

inline void scale_columns_to_unit_norm(Eigen::MatrixXd& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double nrm = x.col(j).norm();
    if (!(nrm > 0.0))
      throw std::runtime_error("design column " + std::to_string(j) +
                               " has zero norm and cannot be standardized");
    x.col(j) /= nrm;
  }
}

/// Sample of `k` indices from {0, ..., size-1} without replacement
/// (partial Fisher-Yates).
inline std::vector<int> sample_without_replacement(int size, int k, Rng& rng) {
  std::vector<int> idx(size);
  for (int i = 0; i < size; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, size - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace detail

/// Builds the design matrix for one replication. Rows of the simulated
/// designs are i.i.d. mean-zero Gaussian with the requested correlation,
/// generated through exact square-root factors of the correlation matrix:
/// the AR recursion is the (banded) Cholesky factor of the AR(1)
/// correlation, and the constant-correlation rows use the one-factor
/// representation sqrt(rho)*z + sqrt(1-rho)*eps. All non-orthogonal columns
/// are rescaled to Euclidean norm one.
inline Eigen::MatrixXd build_design(const DesignSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int n = spec.n;
  const int p = spec.p;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  switch (spec.type) {
    case DesignType::Orthogonal:
      return Eigen::MatrixXd::Identity(n, p);

    case DesignType::SimulatedAR: {
      Eigen::MatrixXd x(n, p);
      const double carry = std::sqrt(1.0 - spec.rho * spec.rho);
      for (int i = 0; i < n; ++i) {
        double prev = gauss(rng);
        x(i, 0) = prev;
        for (int j = 1; j < p; ++j) {
          prev = spec.rho * prev + carry * gauss(rng);
          x(i, j) = prev;
        }
      }
      detail::scale_columns_to_unit_norm(x);
      return x;
    }

    case DesignType::SimulatedConstCorr: {
      if (p > 1 && !(spec.rho > -1.0 / (p - 1)))
        throw std::invalid_argument("constant-correlation matrix is not positive definite");
      Eigen::MatrixXd x(n, p);
      const double shared = std::sqrt(spec.rho);
      const double own = std::sqrt(1.0 - spec.rho);
      for (int i = 0; i < n; ++i) {
        const double z = gauss(rng);
        for (int j = 0; j < p; ++j) x(i, j) = shared * z + own * gauss(rng);
      }
      detail::scale_columns_to_unit_norm(x);
      return x;
    }

    case DesignType::Empirical: {
      const Eigen::MatrixXd source =
          load_matrix_csv(spec.empirical_source, spec.source_has_header);
      if (n > source.rows() || p > source.cols())
        throw std::invalid_argument(
            "empirical design request (" + std::to_string(n) + "x" + std::to_string(p) +
            ") exceeds source (" + std::to_string(source.rows()) + "x" +
            std::to_string(source.cols()) + ")");
      const auto rows = detail::sample_without_replacement(static_cast<int>(source.rows()), n, rng);
      const auto cols = detail::sample_without_replacement(static_cast<int>(source.cols()), p, rng);
      Eigen::MatrixXd x(n, p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = source(rows[i], cols[j]);
      detail::scale_columns_to_unit_norm(x);
      return x;
    }
  }
  throw std::logic_error("unreachable design type");
}

/// Length-n i.i.d. noise with mean zero and variance sigma^2. The t and
/// skew-normal variants are standardized analytically, not empirically.
inline Eigen::VectorXd draw_noise(const NoiseModel& model, int n, std::uint64_t seed) {
  model.validate();
  if (n <= 0) throw std::invalid_argument("noise: n must be positive");
  Rng rng(seed);
  Eigen::VectorXd eps(n);
  switch (model.kind) {
    case NoiseKind::Gaussian: {
      std::normal_distribution<double> gauss(0.0, model.sigma);
      for (int i = 0; i < n; ++i) eps[i] = gauss(rng);
      return eps;
    }
    case NoiseKind::StudentT3: {
      // t with 3 degrees of freedom has variance 3.
      std::student_t_distribution<double> t3(3.0);
      const double scale = model.sigma / std::sqrt(3.0);
      for (int i = 0; i < n; ++i) eps[i] = scale * t3(rng);
      return eps;
    }
    case NoiseKind::SkewNormal3: {
      // Shape 3: delta = 3/sqrt(10); Z = delta*|U0| + sqrt(1-delta^2)*U1 is
      // standard skew-normal with mean delta*sqrt(2/pi) and variance
      // 1 - 2*delta^2/pi. Location/scale chosen analytically so the result
      // has mean 0 and variance sigma^2.
      const double delta = 3.0 / std::sqrt(10.0);
      const double mean_z = delta * std::sqrt(2.0 / std::numbers::pi);
      const double var_z = 1.0 - 2.0 * delta * delta / std::numbers::pi;
      const double omega = model.sigma / std::sqrt(var_z);
      const double tail = std::sqrt(1.0 - delta * delta);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < n; ++i) {
        const double u0 = gauss(rng);
        const double u1 = gauss(rng);
        const double z = delta * std::abs(u0) + tail * u1;
        eps[i] = omega * (z - mean_z);
      }
      return eps;
    }
  }
  throw std::logic_error("unreachable noise kind");
}

}  // namespace pathdf
