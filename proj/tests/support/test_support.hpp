// Shared fixtures and independent oracles for the test suite. Everything in
// here is deliberately naive: enumeration, linear scans, and closed-form
// hand arithmetic that the library implementations are checked against.
#ifndef DAGCACHE_TESTS_SUPPORT_TEST_SUPPORT_HPP_
#define DAGCACHE_TESTS_SUPPORT_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dagcache/catalog.hpp"
#include "dagcache/dag.hpp"
#include "dagcache/objective.hpp"
#include "dagcache/online.hpp"
#include "dagcache/policies.hpp"

namespace dagcache::testing {

// Three-node chain R0 -> R1 -> R2 (sink), costs 0/100/10 s, every output
// 500 MB. The single job arrives at unit rate. Entry ids follow node ids.
inline Catalog make_chain_catalog(double rate = 1.0) {
  JobDag dag;
  dag.add_node({"load", 0.0, 500.0, true});
  dag.add_node({"heavy", 100.0, 500.0, true});
  dag.add_node({"light", 10.0, 500.0, true});
  dag.add_edge(0, 1);
  dag.add_edge(1, 2);
  Catalog cat;
  cat.register_job(std::move(dag), rate);
  return cat;
}

inline JobDag make_chain_dag() {
  JobDag dag;
  dag.add_node({"load", 0.0, 500.0, true});
  dag.add_node({"heavy", 100.0, 500.0, true});
  dag.add_node({"light", 10.0, 500.0, true});
  dag.add_edge(0, 1);
  dag.add_edge(1, 2);
  return dag;
}

inline Placement cache_of(const Catalog& cat, std::initializer_list<EntryId> ids,
                          double capacity_mb) {
  Placement x;
  x.cached.assign(cat.entry_count(), false);
  x.capacity_mb = capacity_mb;
  for (EntryId e : ids) x.cached[static_cast<std::size_t>(e)] = true;
  return x;
}

// -------------------------------------------------------------------------
// Random instance generation. Jobs are random in-trees whose node labels
// come from a small pool; annotations are keyed to the label so two nodes
// that fingerprint-equal can never disagree on cost or size.

struct RandomCatalogOptions {
  std::size_t min_jobs = 1;
  std::size_t max_jobs = 4;
  std::size_t max_nodes = 5;   // per job
  std::size_t label_pool = 9;  // smaller pool -> heavier overlap
  bool equal_sizes = false;    // every output 1 MB
  bool dyadic_rates = false;   // rates in {0.25, 0.5, 1, 2} for exact sums
};

inline double label_cost(std::size_t k) { return 1.0 + static_cast<double>((3 * k) % 7); }
inline double label_size(std::size_t k) { return 1.0 + static_cast<double>(k % 4); }

inline JobDag random_in_tree(std::mt19937_64& rng, std::size_t max_nodes,
                             std::size_t label_pool, bool equal_sizes) {
  std::uniform_int_distribution<std::size_t> node_count(1, max_nodes);
  const std::size_t n = node_count(rng);
  JobDag dag;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng() % label_pool;
    dag.add_node({"op" + std::to_string(k), label_cost(k),
                  equal_sizes ? 1.0 : label_size(k), true});
  }
  for (std::size_t i = 1; i < n; ++i)
    dag.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(rng() % i));
  return dag;
}

inline Catalog random_catalog(std::mt19937_64& rng, const RandomCatalogOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> job_count(opt.min_jobs, opt.max_jobs);
  const std::size_t jobs = job_count(rng);
  Catalog cat;
  for (std::size_t j = 0; j < jobs; ++j) {
    JobDag dag = random_in_tree(rng, opt.max_nodes, opt.label_pool, opt.equal_sizes);
    const double rate = opt.dyadic_rates
                            ? std::ldexp(1.0, -2 + static_cast<int>(rng() % 4))
                            : std::uniform_real_distribution<double>(0.05, 2.0)(rng);
    cat.register_job(std::move(dag), rate);
  }
  return cat;
}

// Draws catalogs until the deduplicated entry count fits `max_entries`.
inline Catalog random_catalog_max_entries(std::mt19937_64& rng, std::size_t max_entries,
                                          const RandomCatalogOptions& opt = {}) {
  for (;;) {
    Catalog cat = random_catalog(rng, opt);
    if (cat.entry_count() <= max_entries && cat.entry_count() >= 2) return cat;
  }
}

// -------------------------------------------------------------------------
// Brute-force oracle for the projection QP
//   min ||y - y_raw||^2  s.t.  0 <= y <= 1, sum_i s_i y_i = K.
// Enumerates every lower/interior/upper pattern of the sized coordinates,
// solves the stationarity condition for the multiplier, keeps candidates
// that satisfy the sign conditions, and returns the closest feasible one.

inline std::vector<double> qp_project_oracle(const std::vector<double>& y_raw,
                                             const std::vector<double>& sizes, double capacity) {
  const std::size_t n = y_raw.size();
  auto clip01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
  std::vector<double> y(n, 0.0);
  std::vector<std::size_t> sized;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[i] == 0.0) {
      y[i] = clip01(y_raw[i]);  // free coordinate: pure box projection
    } else {
      sized.push_back(i);
      total += sizes[i];
    }
  }
  if (capacity > total) {
    for (std::size_t i : sized) y[i] = 1.0;
    return y;
  }
  const std::size_t m = sized.size();
  std::size_t patterns = 1;
  for (std::size_t j = 0; j < m; ++j) patterns *= 3;

  const double inf = std::numeric_limits<double>::infinity();
  double best_dist = inf;
  std::vector<double> best = y;
  std::vector<int> pat(m);
  std::vector<double> cand(n);

  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rem = code;
    for (std::size_t j = 0; j < m; ++j) {
      pat[j] = static_cast<int>(rem % 3);  // 0 = at 0, 1 = interior, 2 = at 1
      rem /= 3;
    }
    double s_yraw = 0.0, s_sq = 0.0, s_up = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = sized[j];
      if (pat[j] == 1) {
        s_yraw += sizes[i] * y_raw[i];
        s_sq += sizes[i] * sizes[i];
      } else if (pat[j] == 2) {
        s_up += sizes[i];
      }
    }
    double mu;
    if (s_sq > 0.0) {
      mu = (s_yraw + s_up - capacity) / s_sq;
    } else {
      // No interior coordinate: the constraint must be met by the clamped
      // mass alone, and any multiplier inside the sign-condition interval
      // works.
      if (std::fabs(s_up - capacity) > 1e-7 * std::max(1.0, capacity)) continue;
      double lo = -inf, hi = inf;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = sized[j];
        if (pat[j] == 0)
          lo = std::max(lo, y_raw[i] / sizes[i]);
        else
          hi = std::min(hi, (y_raw[i] - 1.0) / sizes[i]);
      }
      if (lo > hi + 1e-12) continue;
      mu = lo == -inf ? (hi == inf ? 0.0 : hi) : (hi == inf ? lo : 0.5 * (lo + hi));
    }
    bool ok = true;
    const double tol = 1e-9;
    for (std::size_t j = 0; j < m && ok; ++j) {
      const std::size_t i = sized[j];
      const double v = y_raw[i] - mu * sizes[i];
      if (pat[j] == 0 && v > tol) ok = false;
      if (pat[j] == 1 && (v < -tol || v > 1.0 + tol)) ok = false;
      if (pat[j] == 2 && v < 1.0 - tol) ok = false;
    }
    if (!ok) continue;
    cand = y;
    double mass = 0.0, dist = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = sized[j];
      cand[i] = pat[j] == 0 ? 0.0 : (pat[j] == 2 ? 1.0 : clip01(y_raw[i] - mu * sizes[i]));
      mass += sizes[i] * cand[i];
      dist += (cand[i] - y_raw[i]) * (cand[i] - y_raw[i]);
    }
    if (std::fabs(mass - capacity) > 1e-6 * std::max(1.0, capacity)) continue;
    if (dist < best_dist) {
      best_dist = dist;
      best = cand;
    }
  }
  if (!std::isfinite(best_dist) && m > 0)
    throw std::runtime_error("qp oracle: no feasible pattern found");
  return best;
}

// -------------------------------------------------------------------------
// Minimal reference replacement policies; the cache engine must produce the
// same hit/miss decisions on any access sequence.

struct ReferenceCache {
  bool lru;  // false = FIFO
  double capacity;
  double used = 0.0;
  std::vector<std::pair<EntryId, double>> items = {};  // front = oldest

  bool access(EntryId e, double size) {
    for (auto it = items.begin(); it != items.end(); ++it) {
      if (it->first == e) {
        if (lru) {
          auto kept = *it;
          items.erase(it);
          items.push_back(kept);
        }
        return true;
      }
    }
    if (size > capacity) return false;
    while (used + size > capacity) {
      used -= items.front().second;
      items.erase(items.begin());
    }
    items.emplace_back(e, size);
    used += size;
    return false;
  }
};

// -------------------------------------------------------------------------
// One adaptive-controller trial: Poisson arrivals per period, returns the
// mean integral gain of the installed placements over the last `tail`
// periods.

inline double adaptive_tail_mean_gain(const Catalog& cat, double capacity_mb,
                                      const AdaptiveOptions& opt, std::size_t periods,
                                      std::size_t tail, std::uint64_t seed) {
  AdaptiveController ctl(cat, capacity_mb, opt, seed);
  std::mt19937_64 arrivals(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::poisson_distribution<long>> draw;
  draw.reserve(cat.job_count());
  for (JobId j = 0; j < cat.job_count(); ++j)
    draw.emplace_back(cat.job_rate(j) * opt.period_s);
  double tail_sum = 0.0;
  std::size_t tail_count = 0;
  for (std::size_t k = 1; k <= periods; ++k) {
    for (JobId j = 0; j < cat.job_count(); ++j) {
      const long count = draw[j](arrivals);
      for (long c = 0; c < count; ++c) ctl.observe_job(j);
    }
    Placement x = ctl.end_period();
    if (k + tail > periods) {
      tail_sum += caching_gain(cat, x);
      ++tail_count;
    }
  }
  return tail_count > 0 ? tail_sum / static_cast<double>(tail_count) : 0.0;
}

}  // namespace dagcache::testing

#endif  // DAGCACHE_TESTS_SUPPORT_TEST_SUPPORT_HPP_
