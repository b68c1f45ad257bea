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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace pathdf {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Summation with pairwise splitting; the result depends only on the element
/// order, not on how the work was scheduled across threads.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

/// Unbiased sample standard deviation (zero for samples of size one).
inline double sample_sd(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1));
}

/// Standard error of the sample mean.
inline double standard_error(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
}

struct MeanSe {
  double value = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  return {mean(xs), standard_error(xs)};
}

/// Quantile of a weighted sample by inverting the weighted empirical CDF.
/// Points need not be sorted; weights must be nonnegative with positive sum.
inline double weighted_quantile(std::span<const double> points,
                                std::span<const double> weights, double q) {
  if (points.empty() || points.size() != weights.size())
    throw std::invalid_argument("weighted_quantile: bad sample");
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("weighted_quantile: zero weight");
  const double target = q * total;
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += weights[i];
    if (cum >= target) return points[i];
  }
  return points[order.back()];
}

}  // namespace pathdf
