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
#ifndef DAGCACHE_CATALOG_HPP_
#define DAGCACHE_CATALOG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dagcache/dag.hpp"
#include "dagcache/errors.hpp"
#include "dagcache/fingerprint.hpp"

namespace dagcache {

using JobId = std::uint32_t;
using EntryId = std::uint32_t;

// One distinct computation across the whole job population: the unit that
// can be cached. first_job/first_node give a canonical occurrence whose
// lineage can stand in for any other (their generating subtrees are equal).
struct CatalogEntry {
  Fingerprint fp;
  double cost_s = 0.0;
  double size_mb = 0.0;
  std::vector<JobId> member_jobs;  // ascending, no duplicates
  JobId first_job = 0;
  NodeId first_node = 0;
};

// The deduplicated universe of nodes over a set of recurring jobs, each with
// an arrival rate. Registration validates the tree, derives fingerprints
// (salted with the job id so non-deterministic chains stay job-private) and
// merges nodes into entries; a fingerprint seen again with a different cost
// or size is a ConsistencyError. Immutable once built, safe to share across
// threads read-only.
class Catalog {
 public:
  JobId register_job(JobDag dag, double rate_jobs_per_s) {
    if (!(rate_jobs_per_s > 0.0) || !std::isfinite(rate_jobs_per_s))
      throw ValidationError("job rate must be finite and > 0");
    dag.validate();
    const JobId job = static_cast<JobId>(jobs_.size());
    auto fps = fingerprint_nodes(dag, "job" + std::to_string(job));

    // Stage entry updates so a failed registration leaves the catalog intact.
    struct NewEntry { Fingerprint fp; NodeId node; };
    std::vector<NewEntry> fresh;
    std::unordered_map<Fingerprint, EntryId, FingerprintHash> fresh_index;
    std::vector<EntryId> node_entries(dag.size());
    for (NodeId v = 0; v < dag.size(); ++v) {
      const NodeSpec& spec = dag.node(v);
      if (auto it = index_.find(fps[v]); it != index_.end()) {
        const CatalogEntry& e = entries_[it->second];
        if (e.cost_s != spec.cost_s || e.size_mb != spec.size_mb)
          throw ConsistencyError("fingerprint " + fps[v].hex() +
                                 " re-registered with different cost/size");
        node_entries[v] = it->second;
      } else if (auto ft = fresh_index.find(fps[v]); ft != fresh_index.end()) {
        const NodeSpec& prev = dag.node(fresh[ft->second - entries_.size()].node);
        if (prev.cost_s != spec.cost_s || prev.size_mb != spec.size_mb)
          throw ConsistencyError("fingerprint " + fps[v].hex() +
                                 " appears twice in one job with different cost/size");
        node_entries[v] = ft->second;
      } else {
        EntryId id = static_cast<EntryId>(entries_.size() + fresh.size());
        fresh_index.emplace(fps[v], id);
        fresh.push_back({fps[v], v});
        node_entries[v] = id;
      }
    }

    // Commit.
    for (const NewEntry& ne : fresh) {
      CatalogEntry e;
      e.fp = ne.fp;
      e.cost_s = dag.node(ne.node).cost_s;
      e.size_mb = dag.node(ne.node).size_mb;
      e.first_job = job;
      e.first_node = ne.node;
      index_.emplace(ne.fp, static_cast<EntryId>(entries_.size()));
      entries_.push_back(std::move(e));
    }
    for (EntryId id : node_entries) {
      auto& members = entries_[id].member_jobs;
      if (members.empty() || members.back() != job) members.push_back(job);
    }
    jobs_.push_back({std::move(dag), rate_jobs_per_s, std::move(node_entries)});
    return job;
  }

  std::size_t entry_count() const { return entries_.size(); }
  const CatalogEntry& entry(EntryId e) const {
    if (e >= entries_.size()) throw ValidationError("entry id out of range");
    return entries_[e];
  }
  std::optional<EntryId> find(const Fingerprint& fp) const {
    auto it = index_.find(fp);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t job_count() const { return jobs_.size(); }
  const JobDag& job_dag(JobId j) const { return job_at(j).dag; }
  double job_rate(JobId j) const { return job_at(j).rate; }
  // Entry id of each node of job j, indexed by NodeId.
  std::span<const EntryId> job_entries(JobId j) const { return job_at(j).entries; }

  double total_size_mb() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.size_mb;
    return s;
  }

  // Largest single node cost (the constant C in the estimator moment bound).
  double max_cost_s() const {
    double c = 0.0;
    for (const auto& e : entries_) c = std::max(c, e.cost_s);
    return c;
  }

  // Largest per-node aggregate arrival rate (the constant Lambda): the rate
  // mass of the busiest entry across its member jobs.
  double max_node_rate() const {
    double lam = 0.0;
    for (const auto& e : entries_) {
      double r = 0.0;
      for (JobId j : e.member_jobs) r += jobs_[j].rate;
      lam = std::max(lam, r);
    }
    return lam;
  }

 private:
  struct JobInfo {
    JobDag dag;
    double rate;
    std::vector<EntryId> entries;
  };

  const JobInfo& job_at(JobId j) const {
    if (j >= jobs_.size()) throw ValidationError("job id out of range");
    return jobs_[j];
  }

  std::vector<JobInfo> jobs_;
  std::vector<CatalogEntry> entries_;
  std::unordered_map<Fingerprint, EntryId, FingerprintHash> index_;
};

}  // namespace dagcache

#endif  // DAGCACHE_CATALOG_HPP_
