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
#ifndef DAGCACHE_TRACE_HPP_
#define DAGCACHE_TRACE_HPP_

#include <string>
#include <utility>
#include <vector>

#include "dagcache/catalog.hpp"
#include "dagcache/dag.hpp"
#include "dagcache/errors.hpp"

namespace dagcache {

struct Arrival {
  double t = 0.0;  // seconds since trace start
  JobId job = 0;
};

// A replayable workload: the job graphs, their long-run arrival rates, and
// the concrete arrival sequence. Job ids index `dags`/`rates`.
struct Trace {
  std::vector<JobDag> dags;
  std::vector<double> rates;  // jobs per second
  std::vector<Arrival> arrivals;

  void validate() const {
    if (dags.size() != rates.size())
      throw ValidationError("trace: dags and rates must have equal length");
    double prev = 0.0;
    for (const Arrival& a : arrivals) {
      if (a.job >= dags.size()) throw ValidationError("trace: arrival references unknown job");
      if (!(a.t >= prev)) throw ValidationError("trace: arrivals must be sorted by time");
      prev = a.t;
    }
  }

  Catalog build_catalog() const {
    Catalog cat;
    for (JobId j = 0; j < dags.size(); ++j) cat.register_job(dags[j], rates[j]);
    return cat;
  }
};

// Five analytics jobs sharing a deterministic load -> prepare prefix and
// ending in distinct sinks; every output is 500 MB, so a 500 MB cache holds
// exactly one of them. Arrivals cycle through the jobs every 10 s.
inline Trace simple_example_trace() {
  Trace tr;
  for (int i = 0; i < 5; ++i) {
    JobDag dag;
    NodeId load = dag.add_node({"load", 0.0, 500.0, true});
    NodeId prepare = dag.add_node({"prepare", 100.0, 500.0, true});
    NodeId analysis = dag.add_node({"analysis_" + std::to_string(i), 10.0, 500.0, true});
    dag.add_edge(load, prepare);
    dag.add_edge(prepare, analysis);
    tr.dags.push_back(std::move(dag));
    tr.rates.push_back(0.1);
  }
  for (int k = 0; k < 10; ++k)
    tr.arrivals.push_back({10.0 * k, static_cast<JobId>(k % 5)});
  return tr;
}

}  // namespace dagcache

#endif  // DAGCACHE_TRACE_HPP_
