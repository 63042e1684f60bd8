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
#ifndef DAGCACHE_POLICIES_HPP_
#define DAGCACHE_POLICIES_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <list>
#include <string>
#include <unordered_map>
#include <vector>

#include "dagcache/catalog.hpp"
#include "dagcache/errors.hpp"
#include "dagcache/objective.hpp"
#include "dagcache/offline.hpp"

namespace dagcache {

enum class PolicyKind {
  NoCache,           // never caches anything; the recompute-everything baseline
  Fifo,              // evicts in insertion order
  Lru,               // evicts the least recently used output
  Lcs,               // evicts the output that is cheapest to recompute
  HeuristicAdaptive, // score-driven placement refreshed after every job
  AdaptiveGradient,  // placement installed at period boundaries by the controller
};

inline const char* format_policy(PolicyKind k) {
  switch (k) {
    case PolicyKind::NoCache: return "nocache";
    case PolicyKind::Fifo: return "fifo";
    case PolicyKind::Lru: return "lru";
    case PolicyKind::Lcs: return "lcs";
    case PolicyKind::HeuristicAdaptive: return "heuristic";
    case PolicyKind::AdaptiveGradient: return "adaptive-grad";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& name) {
  if (name == "nocache") return PolicyKind::NoCache;
  if (name == "fifo") return PolicyKind::Fifo;
  if (name == "lru") return PolicyKind::Lru;
  if (name == "lcs") return PolicyKind::Lcs;
  if (name == "heuristic") return PolicyKind::HeuristicAdaptive;
  if (name == "adaptive-grad") return PolicyKind::AdaptiveGradient;
  throw ValidationError("unknown policy '" + name +
                        "' (expected nocache|fifo|lru|lcs|heuristic|adaptive-grad)");
}

enum class AdmitStatus {
  Admitted,
  Rejected,  // does not fit even in an empty cache, or the policy never admits
  Deferred,  // admission is decided outside the per-access path
};

// The resident set plus whatever ordering the eviction rule needs. The
// reactive policies (fifo/lru/lcs) decide admissions and evictions inline;
// the adaptive policies treat the engine as a dumb container and mutate it
// through replace_contents / insert_entry / erase_entry.
class CacheEngine {
 public:
  CacheEngine(const Catalog& cat, PolicyKind kind, double capacity_mb)
      : cat_(cat), kind_(kind), capacity_mb_(capacity_mb) {
    if (!(capacity_mb >= 0.0) || !std::isfinite(capacity_mb))
      throw ValidationError("capacity must be finite and >= 0");
  }

  PolicyKind kind() const { return kind_; }
  double capacity_mb() const { return capacity_mb_; }
  double used_mb() const { return used_mb_; }
  std::size_t resident_count() const { return resident_.size(); }
  bool contains(EntryId e) const { return resident_.count(e) != 0; }

  // contains() plus the policy's touch side effect (recency bump under LRU).
  bool lookup(EntryId e) {
    auto it = resident_.find(e);
    if (it == resident_.end()) return false;
    if (kind_ == PolicyKind::Lru) order_.splice(order_.begin(), order_, it->second);
    return true;
  }

  AdmitStatus admit(EntryId e) {
    switch (kind_) {
      case PolicyKind::NoCache:
        return AdmitStatus::Rejected;
      case PolicyKind::HeuristicAdaptive:
      case PolicyKind::AdaptiveGradient:
        return AdmitStatus::Deferred;
      default:
        break;
    }
    if (contains(e)) {
      lookup(e);
      return AdmitStatus::Admitted;
    }
    const double size = cat_.entry(e).size_mb;
    if (size > capacity_mb_) return AdmitStatus::Rejected;
    while (used_mb_ + size > capacity_mb_ && !resident_.empty()) evict_one();
    place(e);
    return AdmitStatus::Admitted;
  }

  // Unchecked primitives for the score- and placement-driven policies.
  void insert_entry(EntryId e) {
    if (contains(e)) return;
    if (used_mb_ + cat_.entry(e).size_mb > capacity_mb_)
      throw ConsistencyError("insert_entry would exceed capacity");
    place(e);
  }

  bool erase_entry(EntryId e) {
    auto it = resident_.find(e);
    if (it == resident_.end()) return false;
    used_mb_ -= cat_.entry(e).size_mb;
    order_.erase(it->second);
    resident_.erase(it);
    return true;
  }

  void replace_contents(const std::vector<EntryId>& entries) {
    double total = 0.0;
    for (EntryId e : entries) total += cat_.entry(e).size_mb;
    if (total > capacity_mb_ * (1.0 + 1e-12) + 1e-9)
      throw ConsistencyError("replacement contents exceed capacity");
    resident_.clear();
    order_.clear();
    used_mb_ = 0.0;
    for (EntryId e : entries)
      if (!contains(e)) place(e);
  }

  void replace_contents(const Placement& x) { replace_contents(x.entries()); }

  std::vector<EntryId> contents_sorted() const {
    std::vector<EntryId> out;
    out.reserve(resident_.size());
    for (const auto& [e, it] : resident_) out.push_back(e);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void place(EntryId e) {
    order_.push_front(e);
    resident_.emplace(e, order_.begin());
    used_mb_ += cat_.entry(e).size_mb;
  }

  void evict_one();

  const Catalog& cat_;
  PolicyKind kind_;
  double capacity_mb_;
  double used_mb_ = 0.0;
  std::list<EntryId> order_;  // front = newest (LRU: most recently touched)
  std::unordered_map<EntryId, std::list<EntryId>::iterator> resident_;
};

// Cost to materialize node v of job j when every node covered() is already
// available. Ancestors are charged until the walk reaches covered ones; v
// itself is always charged, and each charged ancestor is reported through
// on_charge. Distinct parents have disjoint ancestries in an in-tree, so no
// visited set is needed.
template <typename CoveredFn, typename ChargeFn>
double estimate_cost(const JobDag& dag, NodeId v, CoveredFn covered, ChargeFn on_charge) {
  double cost = dag.node(v).cost_s;
  std::vector<NodeId> stack(dag.parents(v).begin(), dag.parents(v).end());
  while (!stack.empty()) {
    NodeId p = stack.back();
    stack.pop_back();
    if (covered(p)) continue;
    cost += dag.node(p).cost_s;
    on_charge(p);
    for (NodeId q : dag.parents(p)) stack.push_back(q);
  }
  return cost;
}

template <typename CoveredFn>
double estimate_cost(const JobDag& dag, NodeId v, CoveredFn covered) {
  return estimate_cost(dag, v, covered, [](NodeId) {});
}

// Recompute cost of a cached entry if it were evicted right now, priced at
// its first recorded occurrence. The entry itself does not count as cached
// during the walk.
inline double recovery_cost(const Catalog& cat, const CacheEngine& engine, EntryId e) {
  const auto& ent = cat.entry(e);
  const JobDag& dag = cat.job_dag(ent.first_job);
  auto entries = cat.job_entries(ent.first_job);
  return estimate_cost(dag, ent.first_node, [&](NodeId p) {
    return entries[p] != e && engine.contains(entries[p]);
  });
}

inline void CacheEngine::evict_one() {
  EntryId victim = order_.back();  // insertion order (fifo) or recency (lru)
  if (kind_ == PolicyKind::Lcs) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [e, it] : resident_) {
      const double r = recovery_cost(cat_, *this, e);
      if (r < best || (r == best && cat_.entry(e).fp < cat_.entry(victim).fp)) {
        best = r;
        victim = e;
      }
    }
  }
  erase_entry(victim);
}

// Exponentially averaged per-entry benefit scores. Jobs report, for every
// output they touch, the recompute cost attributed to that output at access
// time; entries untouched by a job decay.
class ScoreTable {
 public:
  explicit ScoreTable(const Catalog& cat, double beta = 0.6)
      : beta_(beta),
        historical_(cat.entry_count(), 0.0),
        current_(cat.entry_count(), 0.0),
        in_current_(cat.entry_count(), 0),
        fp_rank_(detail::fingerprint_ranks(cat)) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("beta must be in (0, 1]");
  }

  void begin_job() {
    for (EntryId e : touched_) {
      current_[e] = 0.0;
      in_current_[e] = 0;
    }
    touched_.clear();
  }

  void note_estimate(EntryId e, double cost) {
    if (!in_current_[e]) touched_.push_back(e);
    in_current_[e] = 1;
    current_[e] = cost;
  }

  void end_job() {
    for (EntryId e = 0; e < historical_.size(); ++e)
      historical_[e] = (1.0 - beta_) * historical_[e] + (in_current_[e] ? beta_ * current_[e] : 0.0);
  }

  double beta() const { return beta_; }
  double score(EntryId e) const { return historical_[e]; }
  const std::vector<double>& scores() const { return historical_; }
  std::uint32_t fp_rank(EntryId e) const { return fp_rank_[e]; }

 private:
  double beta_;
  std::vector<double> historical_;
  std::vector<double> current_;
  std::vector<char> in_current_;
  std::vector<EntryId> touched_;
  std::vector<std::uint32_t> fp_rank_;
};

struct JobExecutionRecord {
  std::size_t accessed = 0;  // outputs the job had to resolve
  std::size_t hits = 0;      // resolved straight from the cache
  double bytes_accessed_mb = 0.0;
  double bytes_hit_mb = 0.0;
  double work_s = 0.0;  // recompute time charged to this job
};

// Runs one job against the cache. Resolution walks from the sink: an output
// found in the cache (as of job start) is a hit and its ancestry is never
// visited; a miss is charged and its unvisited parents are resolved next.
// When a score table is given, every resolved output records its current
// recompute estimate. Ancestors already resolved this job, or already
// attributed to an earlier output's estimate this job, count as available
// (the output itself never does), so one job charges each upstream cost to
// exactly one output. Reactive policies then replay the resolved nodes in
// execution order, sources first: hits are touched, misses admitted.
inline JobExecutionRecord process_job(const Catalog& cat, JobId j, CacheEngine& engine,
                                      ScoreTable* scores = nullptr) {
  const JobDag& dag = cat.job_dag(j);
  auto entries = cat.job_entries(j);

  std::vector<char> snapshot(cat.entry_count(), 0);
  for (EntryId e : engine.contents_sorted()) snapshot[e] = 1;

  if (scores) scores->begin_job();
  JobExecutionRecord rec;
  std::vector<char> accessed(dag.size(), 0), hit(dag.size(), 0);
  std::vector<char> attributed(dag.size(), 0);
  std::vector<NodeId> stack{dag.sink()}, resolved;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (accessed[v]) continue;
    accessed[v] = 1;
    resolved.push_back(v);
    ++rec.accessed;
    rec.bytes_accessed_mb += dag.node(v).size_mb;
    if (scores) {
      scores->note_estimate(
          entries[v],
          estimate_cost(
              dag, v,
              [&](NodeId p) { return accessed[p] || attributed[p] || snapshot[entries[p]]; },
              [&](NodeId p) { attributed[p] = 1; }));
    }
    if (snapshot[entries[v]]) {
      hit[v] = 1;
      ++rec.hits;
      rec.bytes_hit_mb += dag.node(v).size_mb;
      continue;
    }
    rec.work_s += dag.node(v).cost_s;
    for (NodeId p : dag.parents(v))
      if (!accessed[p]) stack.push_back(p);
  }
  if (scores) scores->end_job();

  // Execution replay for the reactive policies, deepest (source-most) first.
  std::stable_sort(resolved.begin(), resolved.end(), [&](NodeId a, NodeId b) {
    return dag.depth_to_sink(a) > dag.depth_to_sink(b);
  });
  for (NodeId v : resolved) {
    if (hit[v])
      engine.lookup(entries[v]);
    else
      engine.admit(entries[v]);
  }
  return rec;
}

enum class UpdateMode { Refresh, EvictInsert };

inline UpdateMode parse_update_mode(const std::string& name) {
  if (name == "refresh") return UpdateMode::Refresh;
  if (name == "evict-insert") return UpdateMode::EvictInsert;
  throw ValidationError("unknown update mode '" + name + "' (expected refresh|evict-insert)");
}

struct CacheUpdate {
  std::vector<EntryId> inserted;
  std::vector<EntryId> evicted;
};

namespace detail {

inline double score_density(const Catalog& cat, const ScoreTable& scores, EntryId e) {
  const double s = cat.entry(e).size_mb;
  const double h = scores.score(e);
  if (s > 0.0) return h / s;
  return h > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

// Density-descending order; ties prefer smaller outputs, then fingerprint
// rank, so updates are deterministic.
inline bool density_before(const Catalog& cat, const ScoreTable& scores, EntryId a, EntryId b) {
  const double da = score_density(cat, scores, a), db = score_density(cat, scores, b);
  if (da != db) return da > db;
  const double sa = cat.entry(a).size_mb, sb = cat.entry(b).size_mb;
  if (sa != sb) return sa < sb;
  return scores.fp_rank(a) < scores.fp_rank(b);
}

// Precomputed sort key with the same ordering as density_before; sorting
// thousands of candidates per job is too hot to recompute densities inside
// the comparator.
struct RankedEntry {
  double density;
  double size_mb;
  std::uint32_t fp_rank;
  EntryId id;
  friend bool operator<(const RankedEntry& a, const RankedEntry& b) {
    if (a.density != b.density) return a.density > b.density;
    if (a.size_mb != b.size_mb) return a.size_mb < b.size_mb;
    return a.fp_rank < b.fp_rank;
  }
};

inline RankedEntry make_ranked(const Catalog& cat, const ScoreTable& scores, EntryId e) {
  return {score_density(cat, scores, e), cat.entry(e).size_mb, scores.fp_rank(e), e};
}

}  // namespace detail

// Reshapes the cache around the current scores. Refresh rebuilds from
// scratch: scored entries enter in density order while they fit. The
// incremental mode walks non-resident scored entries in density order and
// admits each one if it fits the free space, or if enough strictly
// lower-density residents can be evicted to make room; once the best
// remaining candidate cannot beat the worst resident, nothing later can
// either, and the update stops.
inline CacheUpdate update_cache(const Catalog& cat, const ScoreTable& scores, CacheEngine& engine,
                                UpdateMode mode = UpdateMode::EvictInsert) {
  CacheUpdate diff;
  const double capacity = engine.capacity_mb();

  if (mode == UpdateMode::Refresh) {
    std::vector<detail::RankedEntry> ranked;
    for (EntryId e = 0; e < cat.entry_count(); ++e)
      if (scores.score(e) > 0.0) ranked.push_back(detail::make_ranked(cat, scores, e));
    std::sort(ranked.begin(), ranked.end());
    std::vector<EntryId> keep;
    double used = 0.0;
    for (const auto& r : ranked) {
      if (used + r.size_mb > capacity) continue;
      keep.push_back(r.id);
      used += r.size_mb;
    }
    const std::vector<EntryId> before = engine.contents_sorted();
    engine.replace_contents(keep);
    std::sort(keep.begin(), keep.end());
    std::set_difference(keep.begin(), keep.end(), before.begin(), before.end(),
                        std::back_inserter(diff.inserted));
    std::set_difference(before.begin(), before.end(), keep.begin(), keep.end(),
                        std::back_inserter(diff.evicted));
    return diff;
  }

  std::vector<detail::RankedEntry> cands;
  for (EntryId e = 0; e < cat.entry_count(); ++e)
    if (scores.score(e) > 0.0 && !engine.contains(e)) cands.push_back(detail::make_ranked(cat, scores, e));
  std::sort(cands.begin(), cands.end());

  // Residents kept sorted worst (lowest density) first so the eviction scan
  // is a prefix walk; insertions keep the order without re-sorting.
  std::vector<detail::RankedEntry> residents;
  for (EntryId e : engine.contents_sorted()) residents.push_back(detail::make_ranked(cat, scores, e));
  std::sort(residents.rbegin(), residents.rend());
  auto place_resident = [&](const detail::RankedEntry& r) {
    auto pos = std::lower_bound(residents.begin(), residents.end(), r,
                                [](const detail::RankedEntry& a, const detail::RankedEntry& b) {
                                  return b < a;  // ascending by density
                                });
    residents.insert(pos, r);
  };

  for (const auto& cand : cands) {
    if (engine.used_mb() + cand.size_mb <= capacity) {
      engine.insert_entry(cand.id);
      diff.inserted.push_back(cand.id);
      place_resident(cand);
      continue;
    }
    if (residents.empty()) continue;  // cand alone exceeds capacity
    // Candidates only get worse from here; stop once the best remaining one
    // cannot beat the worst resident.
    if (cand.density <= residents.front().density) break;
    double reclaimable = capacity - engine.used_mb();
    std::size_t take = 0;
    while (take < residents.size() && reclaimable < cand.size_mb &&
           residents[take].density < cand.density) {
      reclaimable += residents[take].size_mb;
      ++take;
    }
    if (reclaimable < cand.size_mb) continue;  // not enough strictly-worse mass
    for (std::size_t i = 0; i < take; ++i) {
      engine.erase_entry(residents[i].id);
      diff.evicted.push_back(residents[i].id);
    }
    residents.erase(residents.begin(), residents.begin() + static_cast<std::ptrdiff_t>(take));
    engine.insert_entry(cand.id);
    diff.inserted.push_back(cand.id);
    place_resident(cand);
  }
  std::sort(diff.inserted.begin(), diff.inserted.end());
  std::sort(diff.evicted.begin(), diff.evicted.end());
  return diff;
}

}  // namespace dagcache

#endif  // DAGCACHE_POLICIES_HPP_
