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
#ifndef DAGCACHE_OBJECTIVE_HPP_
#define DAGCACHE_OBJECTIVE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dagcache/catalog.hpp"
#include "dagcache/dag.hpp"
#include "dagcache/errors.hpp"

namespace dagcache {

// An integral cache placement over a catalog's entry universe.
// Invariant (enforced by producers and validate_placement): the cached bytes
// never exceed capacity_mb.
struct Placement {
  std::vector<bool> cached;  // indexed by EntryId
  double capacity_mb = 0.0;

  static Placement empty(const Catalog& cat, double capacity_mb) {
    return Placement{std::vector<bool>(cat.entry_count(), false), capacity_mb};
  }

  std::vector<EntryId> entries() const {
    std::vector<EntryId> out;
    for (EntryId e = 0; e < cached.size(); ++e)
      if (cached[e]) out.push_back(e);
    return out;
  }
};

inline double placement_used_mb(const Catalog& cat, const Placement& x) {
  double used = 0.0;
  for (EntryId e = 0; e < x.cached.size() && e < cat.entry_count(); ++e)
    if (x.cached[e]) used += cat.entry(e).size_mb;
  return used;
}

inline void validate_placement(const Catalog& cat, const Placement& x) {
  if (x.cached.size() != cat.entry_count())
    throw ValidationError("placement universe does not match catalog");
  if (placement_used_mb(cat, x) > x.capacity_mb)
    throw ConsistencyError("placement exceeds its capacity");
}

// Fractional cache marginals y in [0,1]^|V| over a catalog's entry universe.
// After projection onto the capacity polytope, sum(size*y) == capacity_mb.
struct FractionalState {
  std::vector<double> y;  // indexed by EntryId
  double capacity_mb = 0.0;
};

inline void validate_fractional(const Catalog& cat, const FractionalState& s) {
  if (s.y.size() != cat.entry_count())
    throw ValidationError("fractional state universe does not match catalog");
  for (double v : s.y)
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("fractional marginals must lie in [0,1]");
}

namespace detail {

// Nodes ordered sink-first (depth to sink ascending), so each node's unique
// child is processed before the node itself.
inline std::vector<NodeId> sink_first_order(const JobDag& dag) {
  const std::size_t n = dag.size();
  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = v;
  std::vector<std::uint32_t> depth(n);
  for (NodeId v = 0; v < n; ++v)
    depth[v] = static_cast<std::uint32_t>(dag.depth_to_sink(v));
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return depth[a] < depth[b]; });
  return order;
}

}  // namespace detail

// Work to run one job from scratch: the summed cost of all of its nodes.
inline double total_work(const JobDag& dag) {
  double w = 0.0;
  for (NodeId v = 0; v < dag.size(); ++v) w += dag.node(v).cost_s;
  return w;
}

// Rate-weighted work across the whole catalog with nothing cached.
inline double expected_total_work(const Catalog& cat) {
  double w = 0.0;
  for (JobId j = 0; j < cat.job_count(); ++j)
    w += cat.job_rate(j) * total_work(cat.job_dag(j));
  return w;
}

// Work to run job j under placement x: a node's cost is charged unless the
// node itself or some node downstream of it is cached (reading the cached
// output short-circuits the whole upstream chain).
inline double job_work_under_placement(const Catalog& cat, JobId j, const Placement& x) {
  if (x.cached.size() != cat.entry_count())
    throw ValidationError("placement universe does not match catalog");
  const JobDag& dag = cat.job_dag(j);
  auto entries = cat.job_entries(j);
  auto order = detail::sink_first_order(dag);
  std::vector<char> covered(dag.size(), 0);
  for (NodeId v : order) {
    bool cov = x.cached[entries[v]];
    if (!cov && dag.has_child(v)) cov = covered[dag.unique_child(v)] != 0;
    covered[v] = cov ? 1 : 0;
  }
  double w = 0.0;
  for (NodeId v = 0; v < dag.size(); ++v)
    if (!covered[v]) w += dag.node(v).cost_s;
  return w;
}

// Expected caching gain F(x): rate-weighted work saved by placement x
// relative to running everything from scratch. Monotone and submodular in
// the cached set.
inline double caching_gain(const Catalog& cat, const Placement& x) {
  if (x.cached.size() != cat.entry_count())
    throw ValidationError("placement universe does not match catalog");
  double gain = 0.0;
  std::vector<char> covered;
  for (JobId j = 0; j < cat.job_count(); ++j) {
    const JobDag& dag = cat.job_dag(j);
    auto entries = cat.job_entries(j);
    auto order = detail::sink_first_order(dag);
    covered.assign(dag.size(), 0);
    for (NodeId v : order) {
      bool cov = x.cached[entries[v]];
      if (!cov && dag.has_child(v)) cov = covered[dag.unique_child(v)] != 0;
      covered[v] = cov ? 1 : 0;
    }
    double saved = 0.0;
    for (NodeId v = 0; v < dag.size(); ++v)
      if (covered[v]) saved += dag.node(v).cost_s;
    gain += cat.job_rate(j) * saved;
  }
  return gain;
}

// Concave upper relaxation L(y): per node, the saved cost saturates once the
// total marginal mass on the node and its downstream chain reaches one.
// Agrees with F at integral y and satisfies (1-1/e) L <= G <= L where G is
// the multilinear extension.
inline double relaxed_gain(const Catalog& cat, const FractionalState& s) {
  validate_fractional(cat, s);
  double gain = 0.0;
  std::vector<double> suffix;
  for (JobId j = 0; j < cat.job_count(); ++j) {
    const JobDag& dag = cat.job_dag(j);
    auto entries = cat.job_entries(j);
    auto order = detail::sink_first_order(dag);
    suffix.assign(dag.size(), 0.0);
    for (NodeId v : order) {
      double sum = s.y[entries[v]];
      if (dag.has_child(v)) sum += suffix[dag.unique_child(v)];
      suffix[v] = sum;
    }
    double saved = 0.0;
    for (NodeId v = 0; v < dag.size(); ++v)
      saved += dag.node(v).cost_s * std::min(1.0, suffix[v]);
    gain += cat.job_rate(j) * saved;
  }
  return gain;
}

// Multilinear extension G(y): expected caching gain when every entry is
// cached independently with probability y_v.
inline double multilinear_gain(const Catalog& cat, const FractionalState& s) {
  validate_fractional(cat, s);
  double gain = 0.0;
  std::vector<double> miss;  // probability that v and its whole chain miss
  for (JobId j = 0; j < cat.job_count(); ++j) {
    const JobDag& dag = cat.job_dag(j);
    auto entries = cat.job_entries(j);
    auto order = detail::sink_first_order(dag);
    miss.assign(dag.size(), 0.0);
    for (NodeId v : order) {
      double m = 1.0 - s.y[entries[v]];
      if (dag.has_child(v)) m *= miss[dag.unique_child(v)];
      miss[v] = m;
    }
    double saved = 0.0;
    for (NodeId v = 0; v < dag.size(); ++v)
      saved += dag.node(v).cost_s * (1.0 - miss[v]);
    gain += cat.job_rate(j) * saved;
  }
  return gain;
}

namespace detail {

// Shared between the analytic supergradient and the online estimator so the
// two use one indicator convention: a node's saved cost keeps flowing to it
// and to every node on its downstream chain while the chain's marginal mass
// is <= 1 (ties count as active: the upper supergradient at kinks).
//
// Adds weight * t(w) to out[entry(w)] for every node w of job j, where
//   t(w) = sum over v in {w} union predecessors(w) of
//          cost(v) * 1{ y(v) + sum_{u in successors(v)} y(u) <= 1 }.
inline void accumulate_job_gradient(const Catalog& cat, JobId j,
                                    const std::vector<double>& y, double weight,
                                    std::vector<double>& out) {
  const JobDag& dag = cat.job_dag(j);
  auto entries = cat.job_entries(j);
  auto order = sink_first_order(dag);
  std::vector<double> suffix(dag.size(), 0.0);
  for (NodeId v : order) {
    double sum = y[entries[v]];
    if (dag.has_child(v)) sum += suffix[dag.unique_child(v)];
    suffix[v] = sum;
  }
  // t accumulates over the in-tree: predecessor sets of distinct parents are
  // disjoint, so t(w) = a(w) + sum over parents p of t(p), sources first.
  std::vector<double> t(dag.size(), 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    double tv = suffix[v] <= 1.0 ? dag.node(v).cost_s : 0.0;
    for (NodeId p : dag.parents(v)) tv += t[p];
    t[v] = tv;
  }
  for (NodeId v = 0; v < dag.size(); ++v) out[entries[v]] += weight * t[v];
}

}  // namespace detail

// A supergradient of the concave relaxation L at y (the upper choice at
// kinks). Valid everywhere: L(y') <= L(y) + z . (y' - y) for all y' in the
// box.
inline std::vector<double> supergradient(const Catalog& cat, const FractionalState& s) {
  validate_fractional(cat, s);
  std::vector<double> z(cat.entry_count(), 0.0);
  for (JobId j = 0; j < cat.job_count(); ++j)
    detail::accumulate_job_gradient(cat, j, s.y, cat.job_rate(j), z);
  return z;
}

struct BruteForceResult {
  Placement placement;
  double gain = 0.0;
};

// Exhaustive argmax of F over all feasible subsets. Ties broken by the
// lexicographically smallest sorted fingerprint sequence. Guarded to 25
// entries.
inline BruteForceResult brute_force_optimum(const Catalog& cat, double capacity_mb) {
  const std::size_t n = cat.entry_count();
  if (n > 25) throw ValidationError("brute_force_optimum supports at most 25 entries");
  if (!(capacity_mb >= 0.0) || !std::isfinite(capacity_mb))
    throw ValidationError("capacity must be finite and >= 0");

  struct JobView {
    const JobDag* dag;
    double rate;
    std::span<const EntryId> entries;
    std::vector<NodeId> order;
  };
  std::vector<JobView> jobs;
  for (JobId j = 0; j < cat.job_count(); ++j) {
    const JobDag& dag = cat.job_dag(j);
    jobs.push_back({&dag, cat.job_rate(j), cat.job_entries(j),
                    detail::sink_first_order(dag)});
  }

  auto fp_sequence = [&](std::uint32_t mask) {
    std::vector<Fingerprint> fps;
    for (std::size_t e = 0; e < n; ++e)
      if (mask & (1u << e)) fps.push_back(cat.entry(static_cast<EntryId>(e)).fp);
    std::sort(fps.begin(), fps.end());
    return fps;
  };

  double best_gain = 0.0;
  std::uint32_t best_mask = 0;
  bool have_best = false;
  std::vector<char> covered;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double used = 0.0;
    for (std::size_t e = 0; e < n; ++e)
      if (mask & (1u << e)) used += cat.entry(static_cast<EntryId>(e)).size_mb;
    if (used > capacity_mb) continue;
    double gain = 0.0;
    for (const JobView& jv : jobs) {
      covered.assign(jv.dag->size(), 0);
      double saved = 0.0;
      for (NodeId v : jv.order) {
        bool cov = (mask & (1u << jv.entries[v])) != 0;
        if (!cov && jv.dag->has_child(v)) cov = covered[jv.dag->unique_child(v)] != 0;
        covered[v] = cov ? 1 : 0;
        if (cov) saved += jv.dag->node(v).cost_s;
      }
      gain += jv.rate * saved;
    }
    if (!have_best || gain > best_gain) {
      best_gain = gain;
      best_mask = mask;
      have_best = true;
    } else if (gain == best_gain && fp_sequence(mask) < fp_sequence(best_mask)) {
      best_mask = mask;
    }
  }

  Placement x = Placement::empty(cat, capacity_mb);
  for (std::size_t e = 0; e < n; ++e)
    if (best_mask & (1u << e)) x.cached[e] = true;
  return {std::move(x), best_gain};
}

}  // namespace dagcache

#endif  // DAGCACHE_OBJECTIVE_HPP_
