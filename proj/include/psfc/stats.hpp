// Copyright 2026 The PSFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include <boost/math/distributions/chi_squared.hpp>

#include "psfc/error.hpp"

namespace psfc::stats {

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Pearson goodness-of-fit against the uniform law on counts.size() cells.
inline ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) return {};
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0) return {};
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  const double dof = static_cast<double>(counts.size() - 1);
  boost::math::chi_squared dist(dof);
  return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

/// Total-variation distance between two empirical distributions on the same
/// cells.
inline double total_variation(std::span<const std::uint64_t> a,
                              std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "total_variation");
  }
  double na = 0, nb = 0;
  for (auto c : a) na += static_cast<double>(c);
  for (auto c : b) nb += static_cast<double>(c);
  if (na == 0 || nb == 0) return 0.0;
  double tv = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    tv += std::abs(static_cast<double>(a[i]) / na - static_cast<double>(b[i]) / nb);
  }
  return tv / 2;
}

/// Total-variation distance of one empirical distribution to uniform.
inline double tv_to_uniform(std::span<const std::uint64_t> counts) {
  double n = 0;
  for (auto c : counts) n += static_cast<double>(c);
  if (n == 0) return 0.0;
  const double u = 1.0 / static_cast<double>(counts.size());
  double tv = 0;
  for (auto c : counts) tv += std::abs(static_cast<double>(c) / n - u);
  return tv / 2;
}

inline double binomial_se(double q, std::uint64_t trials) {
  q = std::clamp(q, 0.0, 1.0);
  return std::sqrt(q * (1 - q) / static_cast<double>(trials));
}

}  // namespace psfc::stats
