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
#ifndef DAGCACHE_ONLINE_HPP_
#define DAGCACHE_ONLINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "dagcache/catalog.hpp"
#include "dagcache/errors.hpp"
#include "dagcache/objective.hpp"
#include "dagcache/offline.hpp"
#include "dagcache/projection.hpp"

namespace dagcache {

struct AdaptiveOptions {
  double period_s = 60.0;      // measurement period length T
  double gamma0 = 0.0;         // 0 = capacity / (max_cost * |V| * sqrt(Lambda) + 1)
  std::size_t max_window = 0;  // cap on the smoothening window; 0 = exact floor(k/2)
};

// Measurement-driven placement adaptation. During a period the controller
// accumulates, per observed arrival, the same per-job ascent direction that
// the analytic gradient integrates against the arrival rates; dividing the
// accumulated total by the period length therefore estimates the
// supergradient of the relaxation without any knowledge of the rates.
// At each period boundary the fractional iterate takes a projected step
// gamma0/sqrt(k) along that estimate, and the placement actually installed
// is a rounding of the step-weighted average of the recent iterates, which
// is what the ascent guarantees converge.
class AdaptiveController {
 public:
  AdaptiveController(const Catalog& cat, double capacity_mb, const AdaptiveOptions& opt,
                     std::uint64_t seed)
      : cat_(cat), capacity_mb_(capacity_mb), opt_(opt), rng_(seed) {
    if (!(capacity_mb >= 0.0) || !std::isfinite(capacity_mb))
      throw ValidationError("capacity must be finite and >= 0");
    if (!(opt.period_s > 0.0) || !std::isfinite(opt.period_s))
      throw ValidationError("period_s must be finite and > 0");
    const std::size_t n = cat.entry_count();
    sizes_.resize(n);
    double total = 0.0;
    for (EntryId e = 0; e < n; ++e) total += sizes_[e] = cat.entry(e).size_mb;
    if (opt_.gamma0 <= 0.0) {
      opt_.gamma0 = capacity_mb / (cat.max_cost_s() * static_cast<double>(n) *
                                       std::sqrt(cat.max_node_rate()) +
                                   1.0);
    }
    y_.assign(n, total > 0.0 ? std::min(1.0, capacity_mb / total) : 0.0);
    accum_.assign(n, 0.0);
    weighted_sum_.assign(n, 0.0);
    smoothed_.assign(n, 0.0);
  }

  // Records one arrival of job j within the current period.
  void observe_job(JobId j) {
    if (j >= cat_.job_count()) throw ValidationError("unknown job id");
    detail::accumulate_job_gradient(cat_, j, y_, 1.0, accum_);
  }

  // Closes the current period: averages the iterate history, rounds the
  // average into the placement to install next, then takes the projected
  // ascent step for the period that just ended.
  Placement end_period() {
    const std::size_t n = y_.size();
    const std::size_t k = ++completed_;
    const double gamma = opt_.gamma0 / std::sqrt(static_cast<double>(k));

    window_.emplace_back(gamma, y_);
    weight_total_ += gamma;
    for (std::size_t i = 0; i < n; ++i) weighted_sum_[i] += gamma * y_[i];
    std::size_t first_kept = k + 1 - window_.size();
    while ((first_kept < k / 2 && window_.size() > 1) ||
           (opt_.max_window > 0 && window_.size() > opt_.max_window)) {
      auto& [wg, wy] = window_.front();
      weight_total_ -= wg;
      for (std::size_t i = 0; i < n; ++i) weighted_sum_[i] -= wg * wy[i];
      window_.pop_front();
      ++first_kept;
    }
    // Convex combination of in-box iterates; the clamp strips the roundoff
    // the incremental window updates accumulate.
    for (std::size_t i = 0; i < n; ++i)
      smoothed_[i] = std::clamp(weighted_sum_[i] / weight_total_, 0.0, 1.0);

    Placement x = round(cat_, FractionalState{smoothed_, capacity_mb_}, rng_);

    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = y_[i] + gamma * accum_[i] / opt_.period_s;
    y_ = project_capacity(raw, sizes_, capacity_mb_);
    std::fill(accum_.begin(), accum_.end(), 0.0);
    return x;
  }

  const std::vector<double>& y() const { return y_; }
  FractionalState smoothed_state() const { return {smoothed_, capacity_mb_}; }
  std::size_t completed_periods() const { return completed_; }
  double period_s() const { return opt_.period_s; }
  double gamma0() const { return opt_.gamma0; }

 private:
  const Catalog& cat_;
  double capacity_mb_;
  AdaptiveOptions opt_;
  std::mt19937_64 rng_;
  std::vector<double> sizes_;
  std::vector<double> y_;        // current fractional iterate
  std::vector<double> accum_;    // per-entry t totals for the open period
  std::deque<std::pair<double, std::vector<double>>> window_;
  std::vector<double> weighted_sum_;
  double weight_total_ = 0.0;
  std::vector<double> smoothed_;
  std::size_t completed_ = 0;
};

struct MomentCheckReport {
  std::vector<double> empirical_mean;   // mean of the per-period estimate
  std::vector<double> analytic;         // exact supergradient at y
  std::vector<double> standard_error;   // per-coordinate SE of the mean
  double max_deviation_se = 0.0;        // max |mean - analytic| / SE over coords
  double second_moment_mean = 0.0;      // empirical E[|z|^2]
  double second_moment_bound = 0.0;     // C^2 |V|^2 (Lambda^2 + Lambda / T)
  bool mean_ok = false;                 // every coordinate within tolerance_se
  bool second_moment_ok = false;        // empirical mean below the bound
};

// Monte-Carlo check of the measurement estimator at a fixed fractional
// point: draws Poisson arrival counts per job and period, forms the
// per-period estimate exactly as the controller does, and compares its mean
// against the analytic supergradient (coordinate-wise, in units of the
// standard error of the mean) and its second moment against the a priori
// bound used by the step-size analysis.
inline MomentCheckReport estimator_moment_check(const Catalog& cat, const FractionalState& s,
                                                double period_s, std::size_t num_periods,
                                                std::uint64_t seed, double tolerance_se = 4.0) {
  validate_fractional(cat, s);
  if (!(period_s > 0.0) || num_periods == 0)
    throw ValidationError("period_s must be > 0 and num_periods >= 1");
  const std::size_t n = cat.entry_count();

  // Per-job gradient contribution for a single arrival, fixed across periods.
  std::vector<std::vector<double>> per_job(cat.job_count(), std::vector<double>(n, 0.0));
  for (JobId j = 0; j < cat.job_count(); ++j)
    detail::accumulate_job_gradient(cat, j, s.y, 1.0, per_job[j]);

  std::mt19937_64 rng(seed);
  std::vector<std::poisson_distribution<long>> arrivals;
  arrivals.reserve(cat.job_count());
  for (JobId j = 0; j < cat.job_count(); ++j)
    arrivals.emplace_back(cat.job_rate(j) * period_s);

  MomentCheckReport r;
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0), z(n);
  for (std::size_t p = 0; p < num_periods; ++p) {
    std::fill(z.begin(), z.end(), 0.0);
    for (JobId j = 0; j < cat.job_count(); ++j) {
      const long c = arrivals[j](rng);
      if (c == 0) continue;
      for (std::size_t i = 0; i < n; ++i) z[i] += static_cast<double>(c) * per_job[j][i];
    }
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] /= period_s;
      sum[i] += z[i];
      sum_sq[i] += z[i] * z[i];
      norm_sq += z[i] * z[i];
    }
    r.second_moment_mean += norm_sq;
  }
  r.second_moment_mean /= static_cast<double>(num_periods);

  r.analytic = supergradient(cat, s);
  r.empirical_mean.resize(n);
  r.standard_error.resize(n);
  r.mean_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / static_cast<double>(num_periods);
    const double var =
        std::max(0.0, sum_sq[i] / static_cast<double>(num_periods) - mean * mean);
    const double se = std::sqrt(var / static_cast<double>(num_periods));
    r.empirical_mean[i] = mean;
    r.standard_error[i] = se;
    const double dev = std::abs(mean - r.analytic[i]);
    // A coordinate with zero sample variance must match exactly.
    const double dev_se = se > 0.0 ? dev / se
                                   : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.max_deviation_se = std::max(r.max_deviation_se, dev_se);
    if (dev_se > tolerance_se) r.mean_ok = false;
  }

  const double c_max = cat.max_cost_s();
  const double lambda = cat.max_node_rate();
  r.second_moment_bound =
      c_max * c_max * static_cast<double>(n) * static_cast<double>(n) *
      (lambda * lambda + lambda / period_s);
  r.second_moment_ok = r.second_moment_mean < r.second_moment_bound;
  return r;
}

}  // namespace dagcache

#endif  // DAGCACHE_ONLINE_HPP_
