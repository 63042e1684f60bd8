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
#ifndef DAGCACHE_GENERATOR_HPP_
#define DAGCACHE_GENERATOR_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dagcache/errors.hpp"
#include "dagcache/trace.hpp"

namespace dagcache {

enum class ArrivalModel { Exponential, Fixed };

// Synthetic multi-stage analytics workload. Each job is a chain of stages;
// a stage is a small in-tree of operator nodes feeding the stage sink, and
// consecutive stage sinks are chained. With probability overlap_prob a
// stage is drawn from a shared pool of templates, whose non-sink nodes then
// deduplicate across every job using that template (the sinks pick up the
// job prefix and stay distinct).
struct GeneratorConfig {
  std::size_t num_jobs = 1000;
  std::size_t stages_per_job = 6;
  std::size_t rdds_per_stage = 6;
  double mean_size_mb = 50.0;
  std::size_t overlap_pool = 32;   // number of stage templates
  double overlap_prob = 0.6;       // chance a stage comes from the pool
  double cost_min_s = 1.0;         // node costs are log-uniform in [min, max]
  double cost_max_s = 100.0;
  ArrivalModel arrivals = ArrivalModel::Exponential;
  double mean_interarrival_s = 10.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (num_jobs == 0 || stages_per_job == 0 || rdds_per_stage == 0)
      throw ValidationError("generator: num_jobs, stages_per_job, rdds_per_stage must be >= 1");
    if (!(overlap_prob >= 0.0 && overlap_prob <= 1.0))
      throw ValidationError("generator: overlap_prob must be in [0, 1]");
    if (overlap_prob > 0.0 && overlap_pool == 0)
      throw ValidationError("generator: overlap_pool must be >= 1 when overlap_prob > 0");
    if (!(cost_min_s > 0.0) || !(cost_max_s >= cost_min_s))
      throw ValidationError("generator: need 0 < cost_min_s <= cost_max_s");
    if (!(mean_size_mb > 0.0)) throw ValidationError("generator: mean_size_mb must be > 0");
    if (!(mean_interarrival_s > 0.0))
      throw ValidationError("generator: mean_interarrival_s must be > 0");
  }
};

namespace detail {

// One stage's shape and annotations. Node k-1 is the stage sink; every
// earlier node feeds a uniformly chosen later node.
struct StageBlueprint {
  std::vector<std::string> labels;
  std::vector<std::size_t> child;  // child[i] for i < k-1
  std::vector<double> cost_s;
  std::vector<double> size_mb;
};

inline StageBlueprint make_stage(const GeneratorConfig& cfg, const std::string& prefix,
                                 std::mt19937_64& rng) {
  const std::size_t k = cfg.rdds_per_stage;
  StageBlueprint b;
  std::uniform_real_distribution<double> logcost(std::log(cfg.cost_min_s),
                                                 std::log(cfg.cost_max_s));
  std::exponential_distribution<double> size(1.0 / cfg.mean_size_mb);
  for (std::size_t i = 0; i < k; ++i) {
    b.labels.push_back(prefix + "_" + std::to_string(i));
    b.cost_s.push_back(std::exp(logcost(rng)));
    b.size_mb.push_back(std::max(1.0, size(rng)));
    if (i + 1 < k) {
      std::uniform_int_distribution<std::size_t> pick(i + 1, k - 1);
      b.child.push_back(pick(rng));
    }
  }
  return b;
}

// Appends the stage to the job, chaining the previous stage sink (if any)
// into this stage's sink. Returns this stage's sink node.
inline NodeId append_stage(JobDag& dag, const StageBlueprint& b, NodeId prev_sink,
                           bool has_prev) {
  const std::size_t k = b.labels.size();
  std::vector<NodeId> ids(k);
  for (std::size_t i = 0; i < k; ++i)
    ids[i] = dag.add_node({b.labels[i], b.cost_s[i], b.size_mb[i], true});
  for (std::size_t i = 0; i + 1 < k; ++i) dag.add_edge(ids[i], ids[b.child[i]]);
  if (has_prev) dag.add_edge(prev_sink, ids[k - 1]);
  return ids[k - 1];
}

}  // namespace detail

inline Trace generate_trace(const GeneratorConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);

  std::vector<detail::StageBlueprint> pool;
  pool.reserve(cfg.overlap_pool);
  for (std::size_t i = 0; i < cfg.overlap_pool; ++i)
    pool.push_back(detail::make_stage(cfg, "p" + std::to_string(i), rng));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_template(0, cfg.overlap_pool - 1);
  std::size_t fresh_counter = 0;

  Trace tr;
  const double rate = 1.0 / (static_cast<double>(cfg.num_jobs) * cfg.mean_interarrival_s);
  for (std::size_t j = 0; j < cfg.num_jobs; ++j) {
    JobDag dag;
    NodeId sink = 0;
    for (std::size_t s = 0; s < cfg.stages_per_job; ++s) {
      if (cfg.overlap_prob > 0.0 && unit(rng) < cfg.overlap_prob) {
        sink = detail::append_stage(dag, pool[pick_template(rng)], sink, s > 0);
      } else {
        auto fresh = detail::make_stage(cfg, "g" + std::to_string(fresh_counter++), rng);
        sink = detail::append_stage(dag, fresh, sink, s > 0);
      }
    }
    tr.dags.push_back(std::move(dag));
    tr.rates.push_back(rate);
  }

  std::exponential_distribution<double> gap(1.0 / cfg.mean_interarrival_s);
  double t = 0.0;
  for (JobId j = 0; j < cfg.num_jobs; ++j) {
    tr.arrivals.push_back({t, j});
    t += cfg.arrivals == ArrivalModel::Exponential ? gap(rng) : cfg.mean_interarrival_s;
  }
  return tr;
}

// Feature-selection style workload: every job re-reads the same large input
// and then runs a projection / covariance / fit chain keyed by its feature
// subset. Occasionally a job repeats an earlier subset exactly, so its
// whole chain deduplicates; all jobs share the input node.
struct RegressionConfig {
  std::size_t num_features = 13;
  std::size_t num_jobs = 100;
  double repeat_prob = 0.04;     // chance a job re-runs a previous subset
  double interarrival_s = 30.0;  // fixed gap between arrivals
  std::uint64_t seed = 1;

  void validate() const {
    if (num_features == 0 || num_jobs == 0)
      throw ValidationError("regression: num_features and num_jobs must be >= 1");
    if (!(repeat_prob >= 0.0 && repeat_prob <= 1.0))
      throw ValidationError("regression: repeat_prob must be in [0, 1]");
    if (!(interarrival_s > 0.0)) throw ValidationError("regression: interarrival_s must be > 0");
  }
};

inline Trace generate_regression_trace(const RegressionConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Subset {
    std::size_t key;
    std::size_t features;
  };
  std::vector<Subset> seen;
  std::size_t fresh = 0;

  Trace tr;
  for (std::size_t j = 0; j < cfg.num_jobs; ++j) {
    Subset s{};
    if (!seen.empty() && unit(rng) < cfg.repeat_prob) {
      std::uniform_int_distribution<std::size_t> pick(0, seen.size() - 1);
      s = seen[pick(rng)];
    } else {
      s = {fresh, 1 + fresh % cfg.num_features};
      ++fresh;
      seen.push_back(s);
    }
    const std::string key = std::to_string(s.key);
    const double m = static_cast<double>(s.features);
    JobDag dag;
    NodeId load = dag.add_node({"load", 120.0, 250.0, true});
    NodeId proj = dag.add_node({"proj_" + key, 8.0 + 0.4 * m, 100.0, true});
    NodeId cov = dag.add_node({"cov_" + key, 6.0 + 0.2 * m, 60.0, true});
    NodeId fit = dag.add_node({"fit_" + key, 5.0, 60.0, true});
    dag.add_edge(load, proj);
    dag.add_edge(proj, cov);
    dag.add_edge(cov, fit);
    tr.dags.push_back(std::move(dag));
    tr.rates.push_back(1.0 / (static_cast<double>(cfg.num_jobs) * cfg.interarrival_s));
    tr.arrivals.push_back({cfg.interarrival_s * static_cast<double>(j), static_cast<JobId>(j)});
  }
  return tr;
}

}  // namespace dagcache

#endif  // DAGCACHE_GENERATOR_HPP_
