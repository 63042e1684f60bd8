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
#ifndef DAGCACHE_OFFLINE_HPP_
#define DAGCACHE_OFFLINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dagcache/catalog.hpp"
#include "dagcache/errors.hpp"
#include "dagcache/objective.hpp"
#include "dagcache/projection.hpp"

namespace dagcache {

namespace detail {

// Entry ids ranked by ascending fingerprint; used for deterministic
// tie-breaking wherever scores collide.
inline std::vector<std::uint32_t> fingerprint_ranks(const Catalog& cat) {
  const std::size_t n = cat.entry_count();
  std::vector<EntryId> by_fp(n);
  for (EntryId e = 0; e < n; ++e) by_fp[e] = e;
  std::sort(by_fp.begin(), by_fp.end(), [&](EntryId a, EntryId b) {
    return cat.entry(a).fp < cat.entry(b).fp;
  });
  std::vector<std::uint32_t> rank(n);
  for (std::uint32_t r = 0; r < n; ++r) rank[by_fp[r]] = r;
  return rank;
}

// Incremental marginal-gain bookkeeping for greedy placement construction.
//
// For every entry e, gain[e] holds the exact increase of F from caching e on
// top of the current placement. Inserting an entry marks the newly covered
// nodes (walking up each occurrence, stopping at nodes that were already
// covered) and debits each newly covered node's cost from the gain of every
// entry on its downstream chain; every node is covered at most once, so a
// whole greedy run costs O(total nodes * depth).
class GreedyGains {
 public:
  explicit GreedyGains(const Catalog& cat) : cat_(cat), gain_(cat.entry_count(), 0.0) {
    covered_.resize(cat.job_count());
    for (JobId j = 0; j < cat.job_count(); ++j) {
      const JobDag& dag = cat.job_dag(j);
      auto entries = cat.job_entries(j);
      covered_[j].assign(dag.size(), 0);
      // subtree cost of v = cost(v) + sum over parents, sources first.
      auto order = sink_first_order(dag);
      std::vector<double> sub(dag.size(), 0.0);
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId v = *it;
        double c = dag.node(v).cost_s;
        for (NodeId p : dag.parents(v)) c += sub[p];
        sub[v] = c;
        gain_[entries[v]] += cat.job_rate(j) * c;
      }
      for (NodeId v = 0; v < dag.size(); ++v)
        occurrences_[entries[v]].push_back({j, v});
    }
  }

  double gain(EntryId e) const { return gain_[e]; }

  void insert(EntryId e) {
    auto it = occurrences_.find(e);
    if (it == occurrences_.end()) return;
    for (auto [j, n] : it->second) cover(j, n);
  }

 private:
  void cover(JobId j, NodeId n) {
    const JobDag& dag = cat_.job_dag(j);
    auto entries = cat_.job_entries(j);
    const double rate = cat_.job_rate(j);
    std::vector<NodeId> stack{n};
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      if (covered_[j][u]) continue;
      covered_[j][u] = 1;
      // u's cost no longer improves any entry on u's chain to the sink.
      const double debit = rate * dag.node(u).cost_s;
      NodeId m = u;
      while (true) {
        gain_[entries[m]] -= debit;
        if (!dag.has_child(m)) break;
        m = dag.unique_child(m);
      }
      for (NodeId p : dag.parents(u)) stack.push_back(p);
    }
  }

  const Catalog& cat_;
  std::vector<double> gain_;
  std::vector<std::vector<char>> covered_;  // per job, per node
  std::unordered_map<EntryId, std::vector<std::pair<JobId, NodeId>>> occurrences_;
};

enum class GreedyScore { Plain, Density };

inline Placement greedy_pass(const Catalog& cat, double capacity_mb, GreedyScore score,
                             const std::vector<std::uint32_t>& fp_rank) {
  const std::size_t n = cat.entry_count();
  GreedyGains gains(cat);
  Placement x = Placement::empty(cat, capacity_mb);
  double used = 0.0;
  while (true) {
    bool found = false;
    EntryId best = 0;
    double best_key = 0.0;
    for (EntryId e = 0; e < n; ++e) {
      if (x.cached[e]) continue;
      const auto& ent = cat.entry(e);
      if (used + ent.size_mb > capacity_mb) continue;
      double key = gains.gain(e);
      if (score == GreedyScore::Density)
        key = ent.size_mb > 0.0 ? key / ent.size_mb
                                : (key > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      if (!found || key > best_key ||
          (key == best_key && (ent.size_mb < cat.entry(best).size_mb ||
                               (ent.size_mb == cat.entry(best).size_mb &&
                                fp_rank[e] < fp_rank[best])))) {
        found = true;
        best = e;
        best_key = key;
      }
    }
    if (!found) break;
    x.cached[best] = true;
    used += cat.entry(best).size_mb;
    gains.insert(best);
  }
  return x;
}

}  // namespace detail

// Greedy placement: runs both the density-scored and plainly-scored passes
// and keeps whichever achieves the higher gain. With equal sizes the plain
// pass alone already carries the (1 - 1/e) guarantee; the density pass
// usually wins under skewed sizes.
inline Placement greedy(const Catalog& cat, double capacity_mb) {
  if (!(capacity_mb >= 0.0) || !std::isfinite(capacity_mb))
    throw ValidationError("capacity must be finite and >= 0");
  auto fp_rank = detail::fingerprint_ranks(cat);
  Placement density = detail::greedy_pass(cat, capacity_mb, detail::GreedyScore::Density, fp_rank);
  Placement plain = detail::greedy_pass(cat, capacity_mb, detail::GreedyScore::Plain, fp_rank);
  return caching_gain(cat, plain) > caching_gain(cat, density) ? plain : density;
}

struct RelaxOptions {
  std::size_t iterations = 20000;
  double gamma0 = 0.0;       // 0 = capacity / (max_cost * |V| * sqrt(Lambda) + 1)
  std::size_t max_window = 0;  // cap on the smoothening window; 0 = exact floor(k/2)
  std::vector<double>* gain_trace = nullptr;  // optional per-iteration L(smoothed)
};

struct RelaxResult {
  FractionalState state;      // best smoothened iterate
  double gain = 0.0;          // L(state)
  std::size_t best_iteration = 0;
  bool capacity_slack = false;  // capacity exceeded the universe; state is all-ones
};

// Maximizes the concave relaxation L over D by projected supergradient
// ascent with step gamma0/sqrt(k) and sliding-window averaging over
// [floor(k/2), k]; returns the averaged iterate with the best L. Fifty
// consecutive decreases of the smoothened objective abort the run (the step
// size is diverging).
inline RelaxResult maximize_relaxation(const Catalog& cat, double capacity_mb,
                                       const RelaxOptions& opt = {}) {
  if (!(capacity_mb >= 0.0) || !std::isfinite(capacity_mb))
    throw ValidationError("capacity must be finite and >= 0");
  const std::size_t n = cat.entry_count();
  std::vector<double> sizes(n);
  for (EntryId e = 0; e < n; ++e) sizes[e] = cat.entry(e).size_mb;
  const double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);

  RelaxResult out;
  out.state.capacity_mb = capacity_mb;
  if (capacity_mb >= total) {
    // Everything fits; L is maximal at all-ones.
    out.state.y.assign(n, 1.0);
    out.gain = relaxed_gain(cat, out.state);
    out.capacity_slack = capacity_mb > total;
    return out;
  }
  if (capacity_mb == 0.0) {
    // Sized coordinates are pinned to zero; zero-size ones are free and L is
    // monotone, so the exact maximizer is immediate.
    out.state.y.assign(n, 0.0);
    for (EntryId e = 0; e < n; ++e)
      if (sizes[e] == 0.0) out.state.y[e] = 1.0;
    out.gain = relaxed_gain(cat, out.state);
    return out;
  }

  double gamma0 = opt.gamma0;
  if (gamma0 <= 0.0) {
    gamma0 = capacity_mb /
             (cat.max_cost_s() * static_cast<double>(n) * std::sqrt(cat.max_node_rate()) + 1.0);
  }

  // y^(1): the uniform feasible point.
  std::vector<double> y(n, total > 0.0 ? capacity_mb / total : 0.0);

  std::deque<std::pair<double, std::vector<double>>> window;  // (gamma_l, y^(l))
  std::vector<double> weighted_sum(n, 0.0);
  double weight_total = 0.0;
  auto push_window = [&](double g, const std::vector<double>& state, std::size_t k) {
    window.emplace_back(g, state);
    weight_total += g;
    for (std::size_t i = 0; i < n; ++i) weighted_sum[i] += g * state[i];
    std::size_t lowest = k / 2;  // keep l in [floor(k/2), k]
    std::size_t first_kept = k + 1 - window.size();
    while ((first_kept < lowest && window.size() > 1) ||
           (opt.max_window > 0 && window.size() > opt.max_window)) {
      auto& [wg, wy] = window.front();
      weight_total -= wg;
      for (std::size_t i = 0; i < n; ++i) weighted_sum[i] -= wg * wy[i];
      window.pop_front();
      ++first_kept;
    }
  };

  FractionalState smoothed{std::vector<double>(n, 0.0), capacity_mb};
  std::vector<double> raw(n), z;
  double prev_l = -std::numeric_limits<double>::infinity();
  int decrease_streak = 0;
  double best_l = -std::numeric_limits<double>::infinity();

  for (std::size_t k = 1; k <= opt.iterations; ++k) {
    const double gamma = gamma0 / std::sqrt(static_cast<double>(k));
    push_window(gamma, y, k);
    // Convex combination of in-box iterates; the clamp strips the roundoff
    // the incremental window updates accumulate.
    for (std::size_t i = 0; i < n; ++i)
      smoothed.y[i] = std::clamp(weighted_sum[i] / weight_total, 0.0, 1.0);
    const double l = relaxed_gain(cat, smoothed);
    if (opt.gain_trace) opt.gain_trace->push_back(l);
    if (l > best_l) {
      best_l = l;
      out.state.y = smoothed.y;
      out.gain = l;
      out.best_iteration = k;
    }
    if (l < prev_l) {
      if (++decrease_streak >= 50)
        throw SolverError("relaxation ascent diverging: smoothened objective fell for 50 "
                          "consecutive iterations (last L=" + std::to_string(l) +
                          " at k=" + std::to_string(k) + "); reduce gamma0");
    } else {
      decrease_streak = 0;
    }
    prev_l = l;

    FractionalState cur{y, capacity_mb};
    z = supergradient(cat, cur);
    for (std::size_t i = 0; i < n; ++i) raw[i] = y[i] + gamma * z[i];
    y = project_capacity(raw, sizes, capacity_mb);
  }
  return out;
}

// Randomized pipage-style rounding of fractional marginals into a feasible
// integral placement. Repeatedly picks two fractional coordinates and moves
// size-weighted mass between them (direction chosen with probability
// proportional to the opposite move's magnitude, which preserves marginals)
// until at most one fractional coordinate remains. The leftover coordinate
// is rounded up when it fits the remaining capacity: the gain is monotone,
// so including it never hurts, while dropping a fittable coordinate can
// starve small instances where that coordinate carries most of the value.
// Only when it genuinely does not fit is it dropped. Zero-size coordinates
// are free and rounded independently by their marginal.
//
// Marginals within kRoundSnap of a bound are resolved as integral: that
// distance is projection and averaging roundoff, not real fractional mass,
// and treating it as fractional lets a converged iterate like 1 - 1e-15
// become the dropped last coordinate, i.e. machine noise would evict a
// full slot. Snapping up is guarded so the placement never outgrows the
// capacity.
inline constexpr double kRoundSnap = 1e-9;

inline Placement round(const Catalog& cat, const FractionalState& s, std::mt19937_64& rng) {
  validate_fractional(cat, s);
  const std::size_t n = s.y.size();
  std::vector<double> y = s.y;
  Placement x = Placement::empty(cat, s.capacity_mb);

  double used = 0.0;
  std::vector<EntryId> fractional, near_one;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (EntryId e = 0; e < n; ++e) {
    if (y[e] >= 1.0) {
      x.cached[e] = true;
      used += cat.entry(e).size_mb;
    } else if (y[e] <= 0.0) {
      // stays out
    } else if (cat.entry(e).size_mb == 0.0) {
      x.cached[e] = unit(rng) < y[e];
    } else if (y[e] >= 1.0 - kRoundSnap) {
      near_one.push_back(e);
    } else if (y[e] > kRoundSnap) {
      fractional.push_back(e);
    }
  }
  std::sort(near_one.begin(), near_one.end(),
            [&](EntryId a, EntryId b) { return y[a] > y[b]; });
  for (EntryId e : near_one) {
    const double sz = cat.entry(e).size_mb;
    if (used + sz <= s.capacity_mb) {
      x.cached[e] = true;
      used += sz;
    } else {
      fractional.push_back(e);  // no room to snap up; round it honestly
    }
  }

  while (fractional.size() >= 2) {
    EntryId u = fractional[fractional.size() - 2];
    EntryId w = fractional[fractional.size() - 1];
    const double su = cat.entry(u).size_mb, sw = cat.entry(w).size_mb;
    // Mass transferable toward u (a) or toward w (b), in size units.
    const double ta = std::min((1.0 - y[u]) * su, y[w] * sw);
    const double tb = std::min(y[u] * su, (1.0 - y[w]) * sw);
    if (unit(rng) * (ta + tb) < tb) {
      // Move ta toward u; the binding coordinate lands exactly on its bound.
      if ((1.0 - y[u]) * su <= y[w] * sw) {
        y[w] -= ta / sw;
        y[u] = 1.0;
      } else {
        y[u] += ta / su;
        y[w] = 0.0;
      }
    } else {
      if (y[u] * su <= (1.0 - y[w]) * sw) {
        y[w] += tb / sw;
        y[u] = 0.0;
      } else {
        y[w] = 1.0;
        y[u] -= tb / su;
      }
    }
    // At least one of the pair saturated; re-queue whichever did not.
    // The residual coordinate picks up arithmetic noise, so the same snap
    // rule applies to it.
    fractional.pop_back();
    fractional.pop_back();
    for (EntryId e : {u, w}) {
      if (y[e] >= 1.0 - kRoundSnap) {
        const double sz = cat.entry(e).size_mb;
        if (y[e] >= 1.0 || used + sz <= s.capacity_mb) {
          x.cached[e] = true;
          used += sz;
        } else {
          fractional.push_back(e);
        }
      } else if (y[e] > kRoundSnap) {
        fractional.push_back(e);
      }
    }
  }
  if (!fractional.empty()) {
    const EntryId f = fractional.back();
    if (used + cat.entry(f).size_mb <= s.capacity_mb) x.cached[f] = true;
  }
  return x;
}

inline Placement round(const Catalog& cat, const FractionalState& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return round(cat, s, rng);
}

}  // namespace dagcache

#endif  // DAGCACHE_OFFLINE_HPP_
