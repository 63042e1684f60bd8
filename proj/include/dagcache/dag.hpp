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
#ifndef DAGCACHE_DAG_HPP_
#define DAGCACHE_DAG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dagcache/errors.hpp"
#include "dagcache/fingerprint.hpp"

namespace dagcache {

using NodeId = std::uint32_t;

// One stage output (RDD) in a job's lineage graph. cost_s is the time to
// recompute this node given its parents' outputs; size_mb is the size of the
// materialized output. Non-deterministic nodes (and everything downstream of
// them) never fingerprint-match across registrations.
struct NodeSpec {
  std::string op_label;
  double cost_s = 0.0;
  double size_mb = 0.0;
  bool deterministic = true;
};

// A job's lineage DAG. The model is a directed in-tree: edges point from a
// node to the (unique) node that consumes it, every node reaches a single
// sink, and joins appear as nodes with several parents. General DAGs (a node
// feeding two consumers) are rejected by validate().
class JobDag {
 public:
  NodeId add_node(NodeSpec spec) {
    if (spec.op_label.empty()) throw ValidationError("node op_label must be non-empty");
    if (!(spec.cost_s >= 0.0) || !std::isfinite(spec.cost_s))
      throw ValidationError("node cost_s must be finite and >= 0");
    if (!(spec.size_mb >= 0.0) || !std::isfinite(spec.size_mb))
      throw ValidationError("node size_mb must be finite and >= 0");
    if (nodes_.size() >= std::numeric_limits<NodeId>::max())
      throw ValidationError("too many nodes");
    nodes_.push_back(std::move(spec));
    parents_.emplace_back();
    children_.emplace_back();
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void add_edge(NodeId parent, NodeId child) {
    check_id(parent);
    check_id(child);
    if (parent == child) throw ValidationError("self-edge");
    auto& kids = children_[parent];
    if (std::find(kids.begin(), kids.end(), child) != kids.end())
      throw ValidationError("duplicate edge");
    kids.push_back(child);
    parents_[child].push_back(parent);
  }

  std::size_t size() const { return nodes_.size(); }
  const NodeSpec& node(NodeId v) const { check_id(v); return nodes_[v]; }
  std::span<const NodeId> parents(NodeId v) const { check_id(v); return parents_[v]; }
  std::span<const NodeId> children(NodeId v) const { check_id(v); return children_[v]; }

  // Directed-tree invariants: exactly one sink, every other node has exactly
  // one outgoing edge, and every node reaches the sink (no directed cycles).
  void validate() const {
    if (nodes_.empty()) throw ValidationError("empty dag");
    NodeId sink = nodes_.size();  // sentinel
    for (NodeId v = 0; v < nodes_.size(); ++v) {
      if (children_[v].empty()) {
        if (sink != nodes_.size()) throw ValidationError("multiple sinks");
        sink = v;
      } else if (children_[v].size() > 1) {
        throw ValidationError("node " + std::to_string(v) +
                              " feeds multiple consumers; lineage must be a directed tree");
      }
    }
    if (sink == nodes_.size()) throw ValidationError("no sink (cycle in edges)");
    // Walking unique-child pointers from any node must reach the sink within
    // |V| hops; a longer walk means a directed cycle.
    for (NodeId v = 0; v < nodes_.size(); ++v) {
      NodeId cur = v;
      std::size_t hops = 0;
      while (cur != sink) {
        cur = children_[cur][0];
        if (++hops > nodes_.size()) throw ValidationError("cycle in edges");
      }
    }
  }

  // The unique node with no outgoing edge. Requires a validated tree.
  NodeId sink() const {
    for (NodeId v = 0; v < nodes_.size(); ++v)
      if (children_[v].empty()) return v;
    throw ValidationError("no sink (cycle in edges)");
  }

  // Unique consumer of v in a validated tree; the sink has none.
  bool has_child(NodeId v) const { check_id(v); return !children_[v].empty(); }
  NodeId unique_child(NodeId v) const {
    check_id(v);
    if (children_[v].empty()) throw ValidationError("sink has no child");
    return children_[v][0];
  }

  // All transitive ancestors of v (excluding v), in discovery order.
  std::vector<NodeId> predecessors(NodeId v) const {
    check_id(v);
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> out;
    std::vector<NodeId> stack(parents_[v].begin(), parents_[v].end());
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      if (seen[u]) continue;
      seen[u] = 1;
      out.push_back(u);
      stack.insert(stack.end(), parents_[u].begin(), parents_[u].end());
    }
    return out;
  }

  // All transitive descendants of v (excluding v). In a validated tree this
  // is the unique path from v to the sink.
  std::vector<NodeId> successors(NodeId v) const {
    check_id(v);
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> out;
    std::vector<NodeId> stack(children_[v].begin(), children_[v].end());
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      if (seen[u]) continue;
      seen[u] = 1;
      out.push_back(u);
      stack.insert(stack.end(), children_[u].begin(), children_[u].end());
    }
    return out;
  }

  // Distance (edge count) from v to the sink in a validated tree.
  std::size_t depth_to_sink(NodeId v) const {
    check_id(v);
    std::size_t d = 0;
    NodeId cur = v;
    while (!children_[cur].empty()) {
      cur = children_[cur][0];
      if (++d > nodes_.size()) throw ValidationError("cycle in edges");
    }
    return d;
  }

 private:
  void check_id(NodeId v) const {
    if (v >= nodes_.size())
      throw ValidationError("node id " + std::to_string(v) + " out of range");
  }

  std::vector<NodeSpec> nodes_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
};

// Derives fingerprints for every node: a digest over (op_label, sorted parent
// fingerprints, deterministic flag). Two nodes in any two jobs match iff
// their entire generating subtrees match. A node with deterministic=false
// anywhere in its ancestry additionally mixes in (salt, local node id), so it
// never matches a node from a different registration (different salt) but is
// stable when the same registration is replayed, e.g. after save/load.
inline std::vector<Fingerprint> fingerprint_nodes(const JobDag& dag,
                                                  const std::string& salt = "") {
  const std::size_t n = dag.size();
  std::vector<Fingerprint> fp(n);
  // state: 0 = unvisited, 1 = on stack, 2 = done.
  std::vector<char> state(n, 0), tainted(n, 0);
  // Iterative post-order over parents; in-trees have no shared substructure,
  // but the general DFS also covers un-validated inputs.
  std::vector<std::pair<NodeId, std::size_t>> stack;
  for (NodeId root = 0; root < n; ++root) {
    if (state[root] == 2) continue;
    stack.emplace_back(root, 0);
    state[root] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      auto ps = dag.parents(v);
      if (next < ps.size()) {
        NodeId p = ps[next++];
        if (state[p] == 1) throw ValidationError("cycle in edges");
        if (state[p] == 0) {
          stack.emplace_back(p, 0);
          state[p] = 1;
        }
        continue;
      }
      if (state[v] != 2) {
        bool taint = !dag.node(v).deterministic;
        std::vector<Fingerprint> parent_fps;
        parent_fps.reserve(ps.size());
        for (NodeId p : ps) {
          parent_fps.push_back(fp[p]);
          taint = taint || tainted[p];
        }
        std::sort(parent_fps.begin(), parent_fps.end());
        detail::DigestBuffer buf;
        buf.put_u8(dag.node(v).deterministic ? 1 : 0);
        buf.put_string(dag.node(v).op_label);
        buf.put_u64(parent_fps.size());
        for (const auto& pfp : parent_fps) buf.put_fingerprint(pfp);
        if (taint) {
          buf.put_u8(0xff);
          buf.put_string(salt);
          buf.put_u64(v);
        }
        fp[v] = buf.finish();
        tainted[v] = taint ? 1 : 0;
        state[v] = 2;
      }
      stack.pop_back();
    }
  }
  return fp;
}

inline Fingerprint fingerprint(const JobDag& dag, NodeId v, const std::string& salt = "") {
  if (v >= dag.size()) throw ValidationError("node id out of range");
  return fingerprint_nodes(dag, salt)[v];
}

}  // namespace dagcache

#endif  // DAGCACHE_DAG_HPP_
