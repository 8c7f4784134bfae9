#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cascade_game/errors.hpp"
#include "cascade_game/random.hpp"

namespace cascade_game {

using NodeId = int;

// Sorted, duplicate-free set of node ids. Ordering is lexicographic on the
// sorted id sequence, so the empty set sorts first.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(std::initializer_list<NodeId> ids) : ids_(ids) { normalize(); }
  explicit NodeSet(std::vector<NodeId> ids) : ids_(std::move(ids)) { normalize(); }

  bool contains(NodeId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

  void insert(NodeId id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) ids_.insert(it, id);
  }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  const std::vector<NodeId>& ids() const noexcept { return ids_; }

  NodeSet minus(const NodeSet& other) const {
    NodeSet out;
    std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                        std::back_inserter(out.ids_));
    return out;
  }

  NodeSet united(const NodeSet& other) const {
    NodeSet out;
    std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                   std::back_inserter(out.ids_));
    return out;
  }

  NodeSet with(NodeId id) const {
    NodeSet out = *this;
    out.insert(id);
    return out;
  }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;
  friend auto operator<=>(const NodeSet& a, const NodeSet& b) { return a.ids_ <=> b.ids_; }

 private:
  void normalize() {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  std::vector<NodeId> ids_;
};

inline std::string to_string(const NodeSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s.ids()[i]);
  }
  return out + "}";
}

// Undirected edge with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(std::min(a, b)), v(std::max(a, b)) {}

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class Role : std::uint8_t { Transmission = 0, Source = 1, Load = 2, SourceLoad = 3 };

inline bool has_source_flag(Role r) { return (static_cast<std::uint8_t>(r) & 1u) != 0; }
inline bool has_load_flag(Role r) { return (static_cast<std::uint8_t>(r) & 2u) != 0; }

inline Role make_role(bool source, bool load) {
  return static_cast<Role>((source ? 1u : 0u) | (load ? 2u : 0u));
}

inline std::string_view role_code(Role r) {
  switch (r) {
    case Role::Source: return "S";
    case Role::Load: return "L";
    case Role::SourceLoad: return "SL";
    case Role::Transmission: break;
  }
  return "T";
}

// Undirected power grid. Node ids are fixed when a node is added and are
// never renumbered; removing nodes leaves holes in the id range.
class GridNetwork {
 public:
  static constexpr NodeId kMaxNodeId = 10'000'000;

  void add_node(NodeId id, Role role) {
    if (id < 0 || id > kMaxNodeId) throw DomainError("node id out of range: " + std::to_string(id));
    if (has_node(id)) throw DuplicateError("duplicate node " + std::to_string(id));
    if (static_cast<std::size_t>(id) >= roles_.size()) {
      roles_.resize(static_cast<std::size_t>(id) + 1, kAbsent);
      adjacency_.resize(static_cast<std::size_t>(id) + 1);
    }
    roles_[static_cast<std::size_t>(id)] = static_cast<std::uint8_t>(role);
    nodes_.insert(std::lower_bound(nodes_.begin(), nodes_.end(), id), id);
  }

  // Returns false when the edge already exists.
  bool add_edge(NodeId a, NodeId b) {
    if (a == b) throw DomainError("self-loop on node " + std::to_string(a));
    if (!has_node(a)) throw ReferenceError(a, "edge references undeclared node");
    if (!has_node(b)) throw ReferenceError(b, "edge references undeclared node");
    const Edge e(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it != edges_.end() && *it == e) return false;
    edges_.insert(it, e);
    insert_sorted(adjacency_[static_cast<std::size_t>(a)], b);
    insert_sorted(adjacency_[static_cast<std::size_t>(b)], a);
    return true;
  }

  bool has_node(NodeId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < roles_.size() &&
           roles_[static_cast<std::size_t>(id)] != kAbsent;
  }

  bool has_edge(NodeId a, NodeId b) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge(a, b));
  }

  Role role(NodeId id) const { return static_cast<Role>(roles_.at(static_cast<std::size_t>(id))); }
  bool is_source(NodeId id) const { return has_node(id) && has_source_flag(role(id)); }
  bool is_load(NodeId id) const { return has_node(id) && has_load_flag(role(id)); }

  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  // One past the largest id ever declared; sizes per-id scratch arrays.
  std::size_t id_bound() const noexcept { return roles_.size(); }

  std::span<const NodeId> neighbors(NodeId id) const {
    return adjacency_.at(static_cast<std::size_t>(id));
  }

  NodeSet sources() const { return select(true); }
  NodeSet loads() const { return select(false); }

  GridNetwork without_nodes(const NodeSet& removed) const {
    GridNetwork out = *this;
    bool any = false;
    for (NodeId id : removed) {
      if (!has_node(id)) continue;
      any = true;
      out.roles_[static_cast<std::size_t>(id)] = kAbsent;
      out.adjacency_[static_cast<std::size_t>(id)].clear();
    }
    if (!any) return out;
    std::erase_if(out.nodes_, [&](NodeId id) { return !out.has_node(id); });
    std::erase_if(out.edges_, [&](const Edge& e) { return !out.has_node(e.u) || !out.has_node(e.v); });
    for (auto& adj : out.adjacency_) {
      std::erase_if(adj, [&](NodeId id) { return !out.has_node(id); });
    }
    return out;
  }

  // `removed` must be sorted.
  GridNetwork without_edges(std::span<const Edge> removed) const {
    GridNetwork out = *this;
    if (removed.empty()) return out;
    std::erase_if(out.edges_, [&](const Edge& e) {
      return std::binary_search(removed.begin(), removed.end(), e);
    });
    for (const Edge& e : removed) {
      std::erase(out.adjacency_[static_cast<std::size_t>(e.u)], e.v);
      std::erase(out.adjacency_[static_cast<std::size_t>(e.v)], e.u);
    }
    return out;
  }

  friend bool operator==(const GridNetwork& a, const GridNetwork& b) {
    if (a.nodes_ != b.nodes_ || a.edges_ != b.edges_) return false;
    for (NodeId id : a.nodes_) {
      if (a.role(id) != b.role(id)) return false;
    }
    return true;
  }

 private:
  static constexpr std::uint8_t kAbsent = 0xFF;

  static void insert_sorted(std::vector<NodeId>& v, NodeId id) {
    v.insert(std::lower_bound(v.begin(), v.end(), id), id);
  }

  NodeSet select(bool source) const {
    std::vector<NodeId> out;
    for (NodeId id : nodes_) {
      if (source ? is_source(id) : is_load(id)) out.push_back(id);
    }
    return NodeSet(std::move(out));
  }

  std::vector<std::uint8_t> roles_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// Grid file format
//
//   # comment
//   node <id> <S|L|T|SL>
//   edge <id> <id>
//
// Declarations may appear in any order. Repeated edges (in either
// orientation) collapse to one.

namespace detail {

inline bool parse_id(std::string_view tok, NodeId& out) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || value < 0 ||
      value > GridNetwork::kMaxNodeId) {
    return false;
  }
  out = static_cast<NodeId>(value);
  return true;
}

inline bool parse_role(std::string_view tok, Role& out) {
  if (tok == "S") out = Role::Source;
  else if (tok == "L") out = Role::Load;
  else if (tok == "T") out = Role::Transmission;
  else if (tok == "SL" || tok == "LS") out = Role::SourceLoad;
  else return false;
  return true;
}

}  // namespace detail

inline GridNetwork load_network(std::string_view text) {
  struct PendingEdge {
    std::size_t line;
    NodeId a, b;
  };
  GridNetwork g;
  std::vector<PendingEdge> pending;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::string_view> tok;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > start) tok.push_back(line.substr(start, i - start));
    }
    if (tok.empty()) continue;

    if (tok[0] == "node") {
      NodeId id;
      Role role;
      if (tok.size() != 3) throw ParseError(line_no, "expected 'node <id> <role>'");
      if (!detail::parse_id(tok[1], id)) throw ParseError(line_no, "bad node id '" + std::string(tok[1]) + "'");
      if (!detail::parse_role(tok[2], role)) throw ParseError(line_no, "bad role '" + std::string(tok[2]) + "'");
      if (g.has_node(id)) throw DuplicateError("line " + std::to_string(line_no) + ": duplicate node " + std::to_string(id));
      g.add_node(id, role);
    } else if (tok[0] == "edge") {
      NodeId a, b;
      if (tok.size() != 3) throw ParseError(line_no, "expected 'edge <id> <id>'");
      if (!detail::parse_id(tok[1], a)) throw ParseError(line_no, "bad node id '" + std::string(tok[1]) + "'");
      if (!detail::parse_id(tok[2], b)) throw ParseError(line_no, "bad node id '" + std::string(tok[2]) + "'");
      if (a == b) throw ParseError(line_no, "self-loop on node " + std::to_string(a));
      pending.push_back({line_no, a, b});
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(tok[0]) + "'");
    }
  }
  for (const auto& e : pending) {
    for (NodeId id : {e.a, e.b}) {
      if (!g.has_node(id)) {
        throw ReferenceError(id, "line " + std::to_string(e.line) + ": edge references undeclared node");
      }
    }
    g.add_edge(e.a, e.b);
  }
  return g;
}

inline std::string to_grid_text(const GridNetwork& g) {
  std::string out;
  for (NodeId id : g.nodes()) {
    out += "node " + std::to_string(id) + " " + std::string(role_code(g.role(id))) + "\n";
  }
  for (const Edge& e : g.edges()) {
    out += "edge " + std::to_string(e.u) + " " + std::to_string(e.v) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Topology queries

inline GridNetwork remove_nodes(const GridNetwork& g, const NodeSet& s) { return g.without_nodes(s); }

// Sources other than i at minimum hop distance from i.
inline NodeSet nearest_sources(const GridNetwork& g, NodeId i) {
  if (!g.has_node(i)) throw DomainError("unknown node " + std::to_string(i));
  std::vector<int> dist(g.id_bound(), -1);
  std::vector<NodeId> frontier{i};
  dist[static_cast<std::size_t>(i)] = 0;
  while (!frontier.empty()) {
    std::vector<NodeId> found;
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId w : g.neighbors(u)) {
        if (dist[static_cast<std::size_t>(w)] >= 0) continue;
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
        next.push_back(w);
        if (g.is_source(w)) found.push_back(w);
      }
    }
    if (!found.empty()) return NodeSet(std::move(found));
    frontier = std::move(next);
  }
  return {};
}

// Connected-component label per id (-1 for absent ids).
inline std::vector<int> component_labels(const GridNetwork& g) {
  std::vector<int> label(g.id_bound(), -1);
  int next = 0;
  std::vector<NodeId> stack;
  for (NodeId root : g.nodes()) {
    if (label[static_cast<std::size_t>(root)] >= 0) continue;
    label[static_cast<std::size_t>(root)] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(u)) {
        if (label[static_cast<std::size_t>(w)] < 0) {
          label[static_cast<std::size_t>(w)] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return label;
}

// Number of loads in `all_loads` that are absent from g or cannot reach any
// source other than themselves.
inline std::size_t disc(const GridNetwork& g, const NodeSet& all_loads) {
  const auto label = component_labels(g);
  std::vector<int> sources_in(g.node_count(), 0);
  for (NodeId id : g.nodes()) {
    if (g.is_source(id)) ++sources_in[static_cast<std::size_t>(label[static_cast<std::size_t>(id)])];
  }
  std::size_t count = 0;
  for (NodeId t : all_loads) {
    if (!g.has_node(t)) {
      ++count;
      continue;
    }
    int available = sources_in[static_cast<std::size_t>(label[static_cast<std::size_t>(t)])];
    if (g.is_source(t)) --available;
    if (available <= 0) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Instance generators

// Connected random grid: a random spanning tree plus uniformly chosen extra
// edges. Roles are drawn without replacement: round(src_frac*n) sources, then
// round(ld_frac*n) loads, each at least one.
inline GridNetwork generate_synthetic(int n, int m, double src_frac, double ld_frac, std::uint64_t seed) {
  if (n < 2) throw DomainError("synthetic grid needs n >= 2");
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  if (m < n - 1) throw DomainError("synthetic grid needs m >= n-1 for connectivity");
  if (m > max_edges) {
    throw DomainError("infeasible edge count " + std::to_string(m) + " > " + std::to_string(max_edges));
  }
  if (!(src_frac > 0) || !(ld_frac > 0) || src_frac + ld_frac > 1.0 + 1e-12) {
    throw DomainError("role fractions must be positive and sum to at most 1");
  }

  Rng rng(seed);
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);

  const auto count_for = [n](double frac) {
    long long c = static_cast<long long>(frac * n + 0.5);
    return static_cast<int>(std::clamp<long long>(c, 1, n));
  };
  int n_src = count_for(src_frac);
  int n_ld = count_for(ld_frac);
  if (n_src + n_ld > n) n_ld = n - n_src;
  if (n_ld < 1) {
    n_src = n - 1;
    n_ld = 1;
  }

  std::vector<Role> roles(static_cast<std::size_t>(n), Role::Transmission);
  {
    std::vector<NodeId> pick = order;
    rng.shuffle(pick);
    for (int i = 0; i < n_src; ++i) roles[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])] = Role::Source;
    for (int i = n_src; i < n_src + n_ld; ++i) roles[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])] = Role::Load;
  }

  GridNetwork g;
  for (int i = 0; i < n; ++i) g.add_node(i, roles[static_cast<std::size_t>(i)]);
  for (std::size_t i = 1; i < order.size(); ++i) {
    g.add_edge(order[i], order[rng.below(i)]);
  }
  std::vector<Edge> spare;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (!g.has_edge(a, b)) spare.emplace_back(a, b);
    }
  }
  rng.shuffle(spare);
  for (int i = 0; i < m - (n - 1); ++i) {
    g.add_edge(spare[static_cast<std::size_t>(i)].u, spare[static_cast<std::size_t>(i)].v);
  }
  return g;
}

// A network together with the game parameters produced by a hardness embedding.
struct ReductionInstance {
  GridNetwork network;
  int attacker_budget = 0;
  int defender_budget = 0;
  double alpha = 0.0;
};

// Set-cover embedding: subset h becomes source node h, ground element s
// becomes load node |H| + s, with an edge wherever s is in h.
// Parameters: k_a = |H|, k_d = k, alpha = |H| + |S|.
inline ReductionInstance generate_set_cover_instance(const std::vector<std::vector<int>>& sets,
                                                     int ground_size, int k) {
  if (ground_size < 0 || k < 0) throw DomainError("negative set-cover size");
  const int h_count = static_cast<int>(sets.size());
  std::vector<bool> covered(static_cast<std::size_t>(ground_size), false);
  for (const auto& h : sets) {
    for (int s : h) {
      if (s < 0 || s >= ground_size) throw DomainError("set element outside ground set: " + std::to_string(s));
      covered[static_cast<std::size_t>(s)] = true;
    }
  }
  for (int s = 0; s < ground_size; ++s) {
    if (!covered[static_cast<std::size_t>(s)]) {
      throw DomainError("ground element " + std::to_string(s) + " is not covered by any set");
    }
  }
  ReductionInstance out;
  for (int h = 0; h < h_count; ++h) out.network.add_node(h, Role::Source);
  for (int s = 0; s < ground_size; ++s) out.network.add_node(h_count + s, Role::Load);
  for (int h = 0; h < h_count; ++h) {
    for (int s : sets[static_cast<std::size_t>(h)]) out.network.add_edge(h, h_count + s);
  }
  out.attacker_budget = h_count;
  out.defender_budget = k;
  out.alpha = static_cast<double>(h_count + ground_size);
  return out;
}

// Vertex-cover embedding: the graph itself, every node both source and
// load. Parameters: k_a = k, k_d = 0, alpha = |E|.
inline ReductionInstance generate_vertex_cover_instance(int node_count, const std::vector<std::pair<int, int>>& edges,
                                                        int k) {
  if (node_count < 0 || k < 0) throw DomainError("negative vertex-cover size");
  ReductionInstance out;
  for (int i = 0; i < node_count; ++i) out.network.add_node(i, Role::SourceLoad);
  for (auto [a, b] : edges) {
    if (a == b) throw DomainError("vertex-cover input has a self-loop on " + std::to_string(a));
    out.network.add_edge(a, b);
  }
  out.attacker_budget = k;
  out.defender_budget = 0;
  out.alpha = static_cast<double>(out.network.edge_count());
  return out;
}

}  // namespace cascade_game
