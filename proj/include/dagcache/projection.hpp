/* Copyright 2026 The Dagcache Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DAGCACHE_PROJECTION_HPP_
#define DAGCACHE_PROJECTION_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dagcache/errors.hpp"

namespace dagcache {

// Euclidean projection onto D = { y in [0,1]^n : sum_v size_v * y_v = K }.
//
// KKT: the projection has the form y_v = clip(y_raw_v - mu * size_v, 0, 1)
// for a multiplier mu chosen so the capacity constraint holds; the feasible
// mass g(mu) = sum size_v * clip(...) is continuous and non-increasing, so mu
// is found by bisection. Zero-size coordinates are unconstrained and simply
// clip to the box.
//
// If K exceeds the total size of the universe, D is empty; the function
// returns all-ones and sets *capacity_slack (callers treat a cache that can
// hold everything as solved).
inline std::vector<double> project_capacity(std::span<const double> y_raw,
                                            std::span<const double> sizes,
                                            double capacity,
                                            bool* capacity_slack = nullptr) {
  if (y_raw.size() != sizes.size())
    throw ValidationError("projection: value/size dimension mismatch");
  if (!(capacity >= 0.0) || !std::isfinite(capacity))
    throw ValidationError("projection: capacity must be finite and >= 0");
  const std::size_t n = y_raw.size();
  if (capacity_slack) *capacity_slack = false;

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y_raw[i])) throw ValidationError("projection: non-finite input");
    if (!(sizes[i] >= 0.0) || !std::isfinite(sizes[i]))
      throw ValidationError("projection: sizes must be finite and >= 0");
    total += sizes[i];
  }
  if (capacity > total) {
    if (capacity_slack) *capacity_slack = true;
    return std::vector<double>(n, 1.0);
  }

  auto clip01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
  // Kahan-compensated so the constraint residual stays near machine epsilon
  // even for large universes.
  auto mass_at = [&](double mu) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sizes[i] == 0.0) continue;
      double term = sizes[i] * clip01(y_raw[i] - mu * sizes[i]) - comp;
      double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
    }
    return sum;
  };

  // Bracket mu: lo drives every sized coordinate to 1 (mass = total >= K),
  // hi drives every sized coordinate to 0 (mass = 0 <= K).
  double lo = 0.0, hi = 0.0;
  bool any_sized = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[i] == 0.0) continue;
    lo = any_sized ? std::min(lo, (y_raw[i] - 1.0) / sizes[i]) : (y_raw[i] - 1.0) / sizes[i];
    hi = any_sized ? std::max(hi, y_raw[i] / sizes[i]) : y_raw[i] / sizes[i];
    any_sized = true;
  }
  std::vector<double> y(n);
  if (!any_sized) {
    // total == 0, and capacity <= total means capacity == 0: box projection.
    for (std::size_t i = 0; i < n; ++i) y[i] = clip01(y_raw[i]);
    return y;
  }

  for (int iter = 0; iter < 256; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (mass_at(mid) >= capacity) lo = mid;
    else hi = mid;
  }
  double mu = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < n; ++i) y[i] = clip01(y_raw[i] - mu * sizes[i]);
  return y;
}

}  // namespace dagcache

#endif  // DAGCACHE_PROJECTION_HPP_
