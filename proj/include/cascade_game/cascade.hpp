#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

#include "cascade_game/errors.hpp"
#include "cascade_game/grid.hpp"

namespace cascade_game {

using EdgeLoadMap = std::map<Edge, double>;
using NodeLoadMap = std::map<NodeId, double>;

namespace detail {

// Breadth-first shortest-path DAG from a single root.
struct PathCounts {
  std::vector<int> dist;          // -1 when unreachable
  std::vector<double> sigma;      // number of shortest root->v paths
  std::vector<NodeId> order;      // nodes in non-decreasing distance
};

inline PathCounts count_shortest_paths(const GridNetwork& g, NodeId root) {
  PathCounts pc;
  pc.dist.assign(g.id_bound(), -1);
  pc.sigma.assign(g.id_bound(), 0.0);
  pc.order.reserve(g.node_count());
  pc.dist[static_cast<std::size_t>(root)] = 0;
  pc.sigma[static_cast<std::size_t>(root)] = 1.0;
  pc.order.push_back(root);
  for (std::size_t head = 0; head < pc.order.size(); ++head) {
    const NodeId u = pc.order[head];
    const int du = pc.dist[static_cast<std::size_t>(u)];
    for (NodeId w : g.neighbors(u)) {
      auto& dw = pc.dist[static_cast<std::size_t>(w)];
      if (dw < 0) {
        dw = du + 1;
        pc.order.push_back(w);
      }
      if (dw == du + 1) pc.sigma[static_cast<std::size_t>(w)] += pc.sigma[static_cast<std::size_t>(u)];
    }
  }
  return pc;
}

}  // namespace detail

// Edge load: for each load t, the nearest other sources N(t) share one unit
// of demand equally, and each source's share is split over its shortest
// t-s paths. Loads without a reachable source contribute nothing.
inline EdgeLoadMap edge_loads(const GridNetwork& g) {
  std::vector<double> acc(g.edge_count(), 0.0);
  const auto& edges = g.edges();
  const auto edge_index = [&](NodeId a, NodeId b) {
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), Edge(a, b)) - edges.begin());
  };

  std::vector<double> beta(g.id_bound(), 0.0);
  for (NodeId t : g.nodes()) {
    if (!g.is_load(t)) continue;
    const auto pc = detail::count_shortest_paths(g, t);

    int nearest = -1;
    std::size_t n_nearest = 0;
    for (NodeId v : pc.order) {
      const int d = pc.dist[static_cast<std::size_t>(v)];
      if (nearest >= 0 && d > nearest) break;
      if (v != t && g.is_source(v)) {
        nearest = d;
        ++n_nearest;
      }
    }
    if (n_nearest == 0) continue;

    // beta(v): weighted fraction of t->N(t) shortest paths continuing from v,
    // per path reaching v. Edge (v, w) with w one step further carries
    // sigma(v) * beta(w).
    const double share = 1.0 / static_cast<double>(n_nearest);
    for (NodeId v : pc.order) beta[static_cast<std::size_t>(v)] = 0.0;
    for (auto it = pc.order.rbegin(); it != pc.order.rend(); ++it) {
      const NodeId v = *it;
      const int dv = pc.dist[static_cast<std::size_t>(v)];
      if (dv > nearest) continue;
      if (dv == nearest) {
        if (v != t && g.is_source(v)) beta[static_cast<std::size_t>(v)] = share / pc.sigma[static_cast<std::size_t>(v)];
        continue;
      }
      double b = 0.0;
      for (NodeId w : g.neighbors(v)) {
        if (pc.dist[static_cast<std::size_t>(w)] != dv + 1) continue;
        const double bw = beta[static_cast<std::size_t>(w)];
        if (bw == 0.0) continue;
        acc[edge_index(v, w)] += pc.sigma[static_cast<std::size_t>(v)] * bw;
        b += bw;
      }
      beta[static_cast<std::size_t>(v)] = b;
    }
  }

  EdgeLoadMap out;
  for (std::size_t i = 0; i < edges.size(); ++i) out.emplace_hint(out.end(), edges[i], acc[i]);
  return out;
}

// Nodal load: unweighted betweenness of each node over all (source, load)
// pairs with s != t, counting only interior nodes of the shortest paths.
inline NodeLoadMap nodal_loads(const GridNetwork& g) {
  std::vector<double> acc(g.id_bound(), 0.0);
  std::vector<double> beta(g.id_bound(), 0.0);
  for (NodeId s : g.nodes()) {
    if (!g.is_source(s)) continue;
    const auto pc = detail::count_shortest_paths(g, s);
    for (NodeId v : pc.order) beta[static_cast<std::size_t>(v)] = 0.0;
    for (auto it = pc.order.rbegin(); it != pc.order.rend(); ++it) {
      const NodeId v = *it;
      const int dv = pc.dist[static_cast<std::size_t>(v)];
      double through = 0.0;
      for (NodeId w : g.neighbors(v)) {
        if (pc.dist[static_cast<std::size_t>(w)] == dv + 1) through += beta[static_cast<std::size_t>(w)];
      }
      if (v != s) acc[static_cast<std::size_t>(v)] += pc.sigma[static_cast<std::size_t>(v)] * through;
      const double own = (v != s && g.is_load(v)) ? 1.0 / pc.sigma[static_cast<std::size_t>(v)] : 0.0;
      beta[static_cast<std::size_t>(v)] = own + through;
    }
  }
  NodeLoadMap out;
  for (NodeId v : g.nodes()) out.emplace_hint(out.end(), v, acc[static_cast<std::size_t>(v)]);
  return out;
}

// Per-edge capacity of the initial network: (1 + alpha) * initial load.
class CapacityMap {
 public:
  CapacityMap() = default;

  CapacityMap(const GridNetwork& g0, double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0)) throw DomainError("capacity margin must be non-negative");
    for (const auto& [e, load] : edge_loads(g0)) capacity_.emplace_hint(capacity_.end(), e, (1.0 + alpha) * load);
  }

  double alpha() const noexcept { return alpha_; }
  std::size_t size() const noexcept { return capacity_.size(); }
  bool contains(const Edge& e) const { return capacity_.contains(e); }

  double at(const Edge& e) const {
    auto it = capacity_.find(e);
    if (it == capacity_.end()) {
      throw DomainError("no capacity for edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
    }
    return it->second;
  }

  const std::map<Edge, double>& values() const noexcept { return capacity_; }

 private:
  double alpha_ = 0.0;
  std::map<Edge, double> capacity_;
};

inline CapacityMap capacities(const GridNetwork& g0, double alpha) { return CapacityMap(g0, alpha); }

// Edges whose current load strictly exceeds capacity, sorted.
inline std::vector<Edge> overloaded_edges(const GridNetwork& g, const CapacityMap& caps) {
  std::vector<Edge> out;
  for (const auto& [e, load] : edge_loads(g)) {
    if (load > caps.at(e)) out.push_back(e);
  }
  return out;
}

// One synchronous round of the failure operator. Nodes are never removed.
inline GridNetwork failure_step(const GridNetwork& g, const CapacityMap& caps) {
  return g.without_edges(overloaded_edges(g, caps));
}

struct CascadeTrace {
  // Non-empty removal sets, one per round that removed something.
  std::vector<std::vector<Edge>> rounds;
  GridNetwork final_network;

  std::size_t removed_edge_count() const {
    std::size_t n = 0;
    for (const auto& r : rounds) n += r.size();
    return n;
  }
};

// Iterates failure_step until nothing more fails.
inline CascadeTrace cascade_fixpoint(const GridNetwork& g, const CapacityMap& caps) {
  CascadeTrace trace;
  trace.final_network = g;
  for (;;) {
    auto failed = overloaded_edges(trace.final_network, caps);
    if (failed.empty()) break;
    trace.final_network = trace.final_network.without_edges(failed);
    trace.rounds.push_back(std::move(failed));
  }
  return trace;
}

inline void check_strategy_nodes(const GridNetwork& g0, const NodeSet& s, const char* what) {
  for (NodeId id : s) {
    if (!g0.has_node(id)) throw ReferenceError(id, std::string(what) + " names a node outside the network");
  }
}

// Loads of g0 left disconnected after removing `removal` and cascading.
inline std::size_t removal_payoff(const GridNetwork& g0, const CapacityMap& caps, const NodeSet& removal) {
  const auto trace = cascade_fixpoint(g0.without_nodes(removal), caps);
  return disc(trace.final_network, g0.loads());
}

// Attacker payoff: the undefended attacked nodes are destroyed, the
// cascade runs to its fixed point, and disconnected loads are counted.
inline std::size_t payoff(const GridNetwork& g0, const CapacityMap& caps, const NodeSet& attack,
                          const NodeSet& defense) {
  check_strategy_nodes(g0, attack, "attack");
  check_strategy_nodes(g0, defense, "defense");
  return removal_payoff(g0, caps, attack.minus(defense));
}

}  // namespace cascade_game
