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
#ifndef DAGCACHE_TRACE_IO_HPP_
#define DAGCACHE_TRACE_IO_HPP_

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include <json.hpp>

#include "dagcache/errors.hpp"
#include "dagcache/trace.hpp"

namespace dagcache {

// Traces are stored as JSON lines: a header record, one record per job (in
// job-id order), then one record per arrival.
//
//   {"record":"header","format":"dagcache-trace","version":1}
//   {"record":"job","rate":0.1,"nodes":[{"op":"load","cost_s":0.0,
//    "size_mb":500.0,"det":true},...],"edges":[[0,1],...]}
//   {"record":"arrival","t":0.0,"job":0}

inline void save_trace(const Trace& tr, std::ostream& out) {
  tr.validate();
  nlohmann::json header = {
      {"record", "header"}, {"format", "dagcache-trace"}, {"version", 1}};
  out << header.dump() << '\n';
  for (JobId j = 0; j < tr.dags.size(); ++j) {
    const JobDag& dag = tr.dags[j];
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId v = 0; v < dag.size(); ++v) {
      const NodeSpec& n = dag.node(v);
      nodes.push_back({{"op", n.op_label},
                       {"cost_s", n.cost_s},
                       {"size_mb", n.size_mb},
                       {"det", n.deterministic}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (NodeId v = 0; v < dag.size(); ++v)
      if (dag.has_child(v)) edges.push_back({v, dag.unique_child(v)});
    nlohmann::json rec = {
        {"record", "job"}, {"rate", tr.rates[j]}, {"nodes", nodes}, {"edges", edges}};
    out << rec.dump() << '\n';
  }
  for (const Arrival& a : tr.arrivals) {
    nlohmann::json rec = {{"record", "arrival"}, {"t", a.t}, {"job", a.job}};
    out << rec.dump() << '\n';
  }
}

inline void save_trace(const Trace& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing", 0);
  save_trace(tr, out);
  if (!out.good()) throw ParseError(path + ": write failed", 0);
}

namespace detail {

template <typename T>
T json_field(const nlohmann::json& rec, const char* key, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type", line);
  }
}

}  // namespace detail

inline Trace load_trace(std::istream& in) {
  Trace tr;
  std::string text;
  std::size_t line = 0;
  bool saw_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line);
    }
    if (!rec.is_object()) throw ParseError("record must be an object", line);
    const auto kind = detail::json_field<std::string>(rec, "record", line);
    if (!saw_header) {
      if (kind != "header") throw ParseError("first record must be the header", line);
      if (detail::json_field<std::string>(rec, "format", line) != "dagcache-trace")
        throw ParseError("not a dagcache-trace file", line);
      if (detail::json_field<int>(rec, "version", line) != 1)
        throw ParseError("unsupported trace version", line);
      saw_header = true;
      continue;
    }
    if (kind == "header") {
      throw ParseError("duplicate header", line);
    } else if (kind == "job") {
      try {
        JobDag dag;
        for (const auto& n : detail::json_field<nlohmann::json>(rec, "nodes", line)) {
          dag.add_node({detail::json_field<std::string>(n, "op", line),
                        detail::json_field<double>(n, "cost_s", line),
                        detail::json_field<double>(n, "size_mb", line),
                        detail::json_field<bool>(n, "det", line)});
        }
        for (const auto& e : detail::json_field<nlohmann::json>(rec, "edges", line)) {
          if (!e.is_array() || e.size() != 2)
            throw ParseError("edge must be a [parent, child] pair", line);
          dag.add_edge(e[0].get<NodeId>(), e[1].get<NodeId>());
        }
        dag.validate();
        tr.dags.push_back(std::move(dag));
        tr.rates.push_back(detail::json_field<double>(rec, "rate", line));
      } catch (const ValidationError& e) {
        throw ParseError(std::string("invalid job: ") + e.what(), line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid job record: ") + e.what(), line);
      }
    } else if (kind == "arrival") {
      Arrival a{detail::json_field<double>(rec, "t", line),
                detail::json_field<JobId>(rec, "job", line)};
      if (a.job >= tr.dags.size())
        throw ParseError("arrival references job " + std::to_string(a.job) +
                             " but only " + std::to_string(tr.dags.size()) +
                             " jobs precede it",
                         line);
      tr.arrivals.push_back(a);
    } else {
      throw ParseError("unknown record kind '" + kind + "'", line);
    }
  }
  if (!saw_header) throw ParseError("empty trace: missing header record", 0);
  try {
    tr.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0);
  }
  return tr;
}

inline Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file", 0);
  return load_trace(in);
}

// Resolves "builtin:<name>" pseudo-paths to generated traces; anything else
// is read from disk.
inline Trace load_trace_or_builtin(const std::string& path) {
  if (path.rfind("builtin:", 0) == 0) {
    const std::string name = path.substr(8);
    if (name == "simple") return simple_example_trace();
    throw ValidationError("unknown builtin trace '" + name + "' (available: simple)");
  }
  return load_trace(path);
}

}  // namespace dagcache

#endif  // DAGCACHE_TRACE_IO_HPP_
