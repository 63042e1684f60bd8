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
#ifndef DAGCACHE_SIMULATOR_HPP_
#define DAGCACHE_SIMULATOR_HPP_

#include <atomic>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dagcache/catalog.hpp"
#include "dagcache/errors.hpp"
#include "dagcache/online.hpp"
#include "dagcache/policies.hpp"
#include "dagcache/trace.hpp"

namespace dagcache {

struct RunConfig {
  PolicyKind policy = PolicyKind::Lru;
  double capacity_mb = 0.0;
  std::uint64_t seed = 1;
  double beta = 0.6;                                // heuristic score decay
  UpdateMode update_mode = UpdateMode::EvictInsert; // heuristic cache reshaping
  double period_s = 0.0;    // adaptive-grad period; 0 = 20x mean interarrival
  double gamma0 = 0.0;      // adaptive-grad step scale; 0 = auto
  std::size_t max_window = 0;
  bool record_per_job = false;
  std::ostream* diagnostics = nullptr;  // period-boundary log for adaptive-grad
};

struct PerJobRecord {
  JobId job = 0;
  double arrival_s = 0.0;
  double start_s = 0.0;
  double finish_s = 0.0;
  JobExecutionRecord exec;
  std::vector<EntryId> cache_after;
};

struct RunReport {
  PolicyKind policy = PolicyKind::Lru;
  double capacity_mb = 0.0;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::size_t accessed_rdds = 0;
  std::size_t hits = 0;
  double accessed_bytes_mb = 0.0;
  double hit_bytes_mb = 0.0;
  double total_work_s = 0.0;
  double makespan_s = 0.0;
  double avg_waiting_s = 0.0;
  std::vector<PerJobRecord> per_job;

  double hit_ratio_count() const {
    return accessed_rdds ? static_cast<double>(hits) / static_cast<double>(accessed_rdds) : 0.0;
  }
  double hit_ratio_bytes() const {
    return accessed_bytes_mb > 0.0 ? hit_bytes_mb / accessed_bytes_mb : 0.0;
  }
};

// Replays the arrivals against one cache under single-server FCFS: a job
// starts at max(arrival, previous completion), its service time is the
// recompute work charged by the cache at start, and waiting is measured
// arrival to completion. The heuristic policy reshapes the cache after
// every job; the adaptive-grad policy installs the controller's placement
// at each period boundary (boundaries are crossed by arrival times).
inline RunReport run(const Catalog& cat, const std::vector<Arrival>& arrivals,
                     const RunConfig& cfg) {
  RunReport rep;
  rep.policy = cfg.policy;
  rep.capacity_mb = cfg.capacity_mb;
  rep.seed = cfg.seed;

  CacheEngine engine(cat, cfg.policy, cfg.capacity_mb);
  std::optional<ScoreTable> scores;
  if (cfg.policy == PolicyKind::HeuristicAdaptive) scores.emplace(cat, cfg.beta);

  std::optional<AdaptiveController> ctl;
  double period = cfg.period_s;
  if (cfg.policy == PolicyKind::AdaptiveGradient) {
    if (period <= 0.0) {
      // Default to the mean interarrival gap: one observed job per update on
      // average. Shorter periods mean noisier estimates but many more ascent
      // steps, and the smoothened average absorbs the noise; coarser windows
      // leave fixed-length traces too few steps to converge.
      period = 60.0;
      if (arrivals.size() >= 2) {
        const double span = arrivals.back().t - arrivals.front().t;
        if (span > 0.0) period = span / static_cast<double>(arrivals.size() - 1);
      }
    }
    ctl.emplace(cat, cfg.capacity_mb, AdaptiveOptions{period, cfg.gamma0, cfg.max_window},
                cfg.seed);
  }

  double server_free = 0.0;
  double waiting_total = 0.0;
  double next_boundary = period;
  for (const Arrival& a : arrivals) {
    if (ctl) {
      while (a.t >= next_boundary) {
        Placement x = ctl->end_period();
        engine.replace_contents(x);
        if (cfg.diagnostics) {
          *cfg.diagnostics << "period " << ctl->completed_periods() << " t=" << next_boundary
                           << " installed " << x.entries().size() << " entries, gain "
                           << caching_gain(cat, x) << "\n";
        }
        next_boundary += period;
      }
      ctl->observe_job(a.job);
    }
    const double start = std::max(a.t, server_free);
    JobExecutionRecord exec = process_job(cat, a.job, engine, scores ? &*scores : nullptr);
    if (scores) update_cache(cat, *scores, engine, cfg.update_mode);
    const double finish = start + exec.work_s;
    server_free = finish;
    waiting_total += finish - a.t;

    ++rep.jobs;
    rep.accessed_rdds += exec.accessed;
    rep.hits += exec.hits;
    rep.accessed_bytes_mb += exec.bytes_accessed_mb;
    rep.hit_bytes_mb += exec.bytes_hit_mb;
    rep.total_work_s += exec.work_s;
    rep.makespan_s = finish;
    if (cfg.record_per_job)
      rep.per_job.push_back({a.job, a.t, start, finish, exec, engine.contents_sorted()});
  }
  rep.avg_waiting_s = rep.jobs ? waiting_total / static_cast<double>(rep.jobs) : 0.0;
  return rep;
}

inline RunReport run(const Trace& tr, const RunConfig& cfg) {
  tr.validate();
  Catalog cat = tr.build_catalog();
  return run(cat, tr.arrivals, cfg);
}

struct SweepConfig {
  std::vector<PolicyKind> policies;
  std::vector<double> capacities_mb;
  std::vector<std::uint64_t> seeds;
  RunConfig base;  // policy/capacity/seed are overridden per cell
  std::size_t threads = 1;
};

struct SweepCell {
  PolicyKind policy = PolicyKind::Lru;
  double capacity_mb = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunReport report;
};

// Cartesian product of policies x capacities x seeds; each cell runs
// independently (optionally across threads) and failures are captured per
// cell instead of aborting the sweep.
inline std::vector<SweepCell> sweep(const Catalog& cat, const std::vector<Arrival>& arrivals,
                                    const SweepConfig& cfg) {
  if (cfg.policies.empty() || cfg.capacities_mb.empty() || cfg.seeds.empty())
    throw ValidationError("sweep needs at least one policy, capacity, and seed");
  std::vector<SweepCell> cells;
  for (PolicyKind p : cfg.policies)
    for (double k : cfg.capacities_mb)
      for (std::uint64_t s : cfg.seeds) cells.push_back({p, k, s, false, "", {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      SweepCell& cell = cells[i];
      RunConfig rc = cfg.base;
      rc.policy = cell.policy;
      rc.capacity_mb = cell.capacity_mb;
      rc.seed = cell.seed;
      rc.diagnostics = nullptr;
      try {
        cell.report = run(cat, arrivals, rc);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };
  const std::size_t nthreads = std::max<std::size_t>(1, cfg.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return cells;
}

inline std::vector<SweepCell> sweep(const Trace& tr, const SweepConfig& cfg) {
  tr.validate();
  Catalog cat = tr.build_catalog();
  return sweep(cat, tr.arrivals, cfg);
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

// Stable, versioned column set (schema v1). One row per run.
inline constexpr const char* kSweepCsvHeader =
    "schema,policy,capacity_mb,seed,jobs,accessed_rdds,hits,hit_ratio_count,"
    "accessed_bytes_mb,hit_bytes_mb,hit_ratio_bytes,total_work_s,makespan_s,"
    "avg_waiting_s,ok,error";

inline void write_sweep_csv_row(const SweepCell& c, std::ostream& out) {
  using detail::fmt_double;
  const RunReport& r = c.report;
  out << "dagcache-sweep-v1," << format_policy(c.policy) << ',' << fmt_double(c.capacity_mb)
      << ',' << c.seed << ',' << r.jobs << ',' << r.accessed_rdds << ',' << r.hits << ','
      << fmt_double(r.hit_ratio_count()) << ',' << fmt_double(r.accessed_bytes_mb) << ','
      << fmt_double(r.hit_bytes_mb) << ',' << fmt_double(r.hit_ratio_bytes()) << ','
      << fmt_double(r.total_work_s) << ',' << fmt_double(r.makespan_s) << ','
      << fmt_double(r.avg_waiting_s) << ',' << (c.ok ? "1" : "0") << ','
      << detail::csv_escape(c.error) << '\n';
}

inline void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& out) {
  out << kSweepCsvHeader << '\n';
  for (const SweepCell& c : cells) write_sweep_csv_row(c, out);
}

inline void write_report_csv(const RunReport& r, std::ostream& out) {
  out << kSweepCsvHeader << '\n';
  write_sweep_csv_row({r.policy, r.capacity_mb, r.seed, true, "", r}, out);
}

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j = {
      {"policy", format_policy(r.policy)},
      {"capacity_mb", r.capacity_mb},
      {"seed", r.seed},
      {"jobs", r.jobs},
      {"accessed_rdds", r.accessed_rdds},
      {"hits", r.hits},
      {"hit_ratio_count", r.hit_ratio_count()},
      {"accessed_bytes_mb", r.accessed_bytes_mb},
      {"hit_bytes_mb", r.hit_bytes_mb},
      {"hit_ratio_bytes", r.hit_ratio_bytes()},
      {"total_work_s", r.total_work_s},
      {"makespan_s", r.makespan_s},
      {"avg_waiting_s", r.avg_waiting_s},
  };
  if (!r.per_job.empty()) {
    nlohmann::json per = nlohmann::json::array();
    for (const PerJobRecord& p : r.per_job) {
      per.push_back({{"job", p.job},
                     {"arrival_s", p.arrival_s},
                     {"start_s", p.start_s},
                     {"finish_s", p.finish_s},
                     {"accessed", p.exec.accessed},
                     {"hits", p.exec.hits},
                     {"work_s", p.exec.work_s},
                     {"cache_after", p.cache_after}});
    }
    j["per_job"] = per;
  }
  return j;
}

inline void write_sweep_json(const std::vector<SweepCell>& cells, std::ostream& out) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepCell& c : cells) {
    nlohmann::json j = c.ok ? report_to_json(c.report) : nlohmann::json::object();
    j["policy"] = format_policy(c.policy);
    j["capacity_mb"] = c.capacity_mb;
    j["seed"] = c.seed;
    j["ok"] = c.ok;
    if (!c.ok) j["error"] = c.error;
    arr.push_back(j);
  }
  out << arr.dump(2) << '\n';
}

}  // namespace dagcache

#endif  // DAGCACHE_SIMULATOR_HPP_
