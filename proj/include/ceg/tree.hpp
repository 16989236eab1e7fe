#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ceg/error.hpp"
#include "ceg/rational.hpp"

namespace ceg {

using VertexId = std::uint32_t;

struct TreeEdge {
  VertexId source = 0;
  VertexId target = 0;
  std::string label;
  Rat prob;
};

/// Root-to-leaf path, stored as indices into EventTree::edges().
struct TreeRoute {
  std::vector<std::size_t> edges;

  friend bool operator==(const TreeRoute&, const TreeRoute&) = default;
};

/// A validated event tree. Vertex 0 is the root; leaves are inferred.
/// Immutable once built.
class EventTree {
 public:
  static EventTree build(std::size_t vertex_count, std::vector<TreeEdge> edges);

  std::size_t vertex_count() const { return children_.size(); }
  VertexId root() const { return 0; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  const TreeEdge& edge(std::size_t i) const { return edges_.at(i); }

  /// Outgoing edge indices of v, sorted by label.
  std::span<const std::size_t> out_edges(VertexId v) const { return children_.at(v); }
  /// Index of the edge entering v; empty for the root.
  std::optional<std::size_t> parent_edge(VertexId v) const {
    auto e = parent_edge_.at(v);
    if (e == npos) return std::nullopt;
    return e;
  }
  bool is_leaf(VertexId v) const { return children_.at(v).empty(); }

  /// Non-leaf vertices in breadth-first order from the root.
  std::vector<VertexId> situations() const {
    std::vector<VertexId> out;
    for (VertexId v : bfs_order_)
      if (!is_leaf(v)) out.push_back(v);
    return out;
  }
  std::vector<VertexId> leaves() const {
    std::vector<VertexId> out;
    for (VertexId v : bfs_order_)
      if (is_leaf(v)) out.push_back(v);
    return out;
  }
  const std::vector<VertexId>& bfs_order() const { return bfs_order_; }

  /// All routes, ordered lexicographically by their label sequences.
  std::vector<TreeRoute> routes() const;

  /// The route ending at the given leaf.
  TreeRoute route_to(VertexId leaf) const;

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<TreeEdge> edges_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> parent_edge_;
  std::vector<VertexId> bfs_order_;
};

inline EventTree EventTree::build(std::size_t vertex_count, std::vector<TreeEdge> edges) {
  if (vertex_count < 2 || edges.empty())
    throw Error(ErrorCode::EmptyTree, "an event tree needs a root and at least one edge");

  EventTree t;
  t.children_.assign(vertex_count, {});
  t.parent_edge_.assign(vertex_count, npos);

  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.source >= vertex_count || e.target >= vertex_count)
      throw Error(ErrorCode::InvalidVertex, "edge " + std::to_string(i) + " references vertex " +
                                                std::to_string(std::max(e.source, e.target)) +
                                                " but the tree has " + std::to_string(vertex_count));
    if (e.prob <= 0)
      throw Error(ErrorCode::NonpositiveProb, "edge " + std::to_string(e.source) + "->" +
                                                  std::to_string(e.target) + " has probability " +
                                                  to_string(e.prob));
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (t.parent_edge_[e.target] != npos)
      throw Error(ErrorCode::MultipleParents, "vertex " + std::to_string(e.target) + " has more than one parent");
    t.parent_edge_[e.target] = i;
    t.children_[e.source].push_back(i);
  }

  // Walking parent pointers from any vertex must end at the root; a walk that
  // revisits a vertex is a cycle, one that stops elsewhere is disconnected.
  std::vector<std::uint8_t> state(vertex_count, 0);  // 0 new, 1 on stack, 2 done
  state[0] = 2;
  for (VertexId start = 0; start < vertex_count; ++start) {
    std::vector<VertexId> chain;
    VertexId v = start;
    while (state[v] == 0) {
      state[v] = 1;
      chain.push_back(v);
      auto pe = t.parent_edge_[v];
      if (pe == npos) break;
      v = edges[pe].source;
    }
    if (state[v] == 1 && t.parent_edge_[v] != npos)
      throw Error(ErrorCode::CycleDetected, "vertex " + std::to_string(v) + " lies on a cycle");
    if (state[v] == 1)
      throw Error(ErrorCode::DisconnectedVertex, "vertex " + std::to_string(v) + " is not reachable from the root");
    for (VertexId c : chain) state[c] = 2;
  }
  if (t.parent_edge_[0] != npos) {
    // Only reachable when the root is its own ancestor.
    throw Error(ErrorCode::CycleDetected, "the root has a parent");
  }

  t.edges_ = std::move(edges);
  for (VertexId v = 0; v < vertex_count; ++v) {
    auto& kids = t.children_[v];
    std::sort(kids.begin(), kids.end(),
              [&](std::size_t a, std::size_t b) { return t.edges_[a].label < t.edges_[b].label; });
    for (std::size_t k = 1; k < kids.size(); ++k)
      if (t.edges_[kids[k]].label == t.edges_[kids[k - 1]].label)
        throw Error(ErrorCode::DuplicateSiblingLabel,
                    "vertex " + std::to_string(v) + " has two edges labelled '" + t.edges_[kids[k]].label + "'");
    if (!kids.empty()) {
      Rat sum = 0;
      for (auto k : kids) sum += t.edges_[k].prob;
      if (sum != 1)
        throw Error(ErrorCode::ProbSumNotOne,
                    "outgoing probabilities of vertex " + std::to_string(v) + " sum to " + to_string(sum));
    }
  }

  t.bfs_order_.reserve(vertex_count);
  t.bfs_order_.push_back(0);
  for (std::size_t head = 0; head < t.bfs_order_.size(); ++head)
    for (auto k : t.children_[t.bfs_order_[head]]) t.bfs_order_.push_back(t.edges_[k].target);
  return t;
}

inline std::vector<TreeRoute> EventTree::routes() const {
  std::vector<TreeRoute> out;
  std::vector<std::size_t> path;
  auto visit = [&](auto&& self, VertexId v) -> void {
    if (is_leaf(v)) {
      out.push_back(TreeRoute{path});
      return;
    }
    for (auto k : children_[v]) {
      path.push_back(k);
      self(self, edges_[k].target);
      path.pop_back();
    }
  };
  visit(visit, root());
  return out;
}

inline TreeRoute EventTree::route_to(VertexId leaf) const {
  if (leaf >= vertex_count() || !is_leaf(leaf))
    throw Error(ErrorCode::RouteNotInTree, "vertex " + std::to_string(leaf) + " is not a leaf");
  TreeRoute r;
  for (auto pe = parent_edge_[leaf]; pe != npos; pe = parent_edge_[edges_[pe].source]) r.edges.push_back(pe);
  std::reverse(r.edges.begin(), r.edges.end());
  return r;
}

namespace detail {

inline void check_route(const EventTree& tree, const TreeRoute& route) {
  if (route.edges.empty()) throw Error(ErrorCode::RouteNotInTree, "empty route");
  VertexId at = tree.root();
  for (auto e : route.edges) {
    if (e >= tree.edges().size()) throw Error(ErrorCode::RouteNotInTree, "unknown edge index " + std::to_string(e));
    if (tree.edge(e).source != at) throw Error(ErrorCode::RouteNotInTree, "route edges do not chain");
    at = tree.edge(e).target;
  }
  if (!tree.is_leaf(at)) throw Error(ErrorCode::RouteNotInTree, "route does not end at a leaf");
}

}  // namespace detail

/// Product of the edge probabilities along a route.
inline Rat atom_probability(const EventTree& tree, const TreeRoute& route) {
  detail::check_route(tree, route);
  Rat p = 1;
  for (auto e : route.edges) p *= tree.edge(e).prob;
  return p;
}

/// Recovers a primitive probability from atom probabilities: the mass of
/// routes using the edge over the mass of routes through its source.
/// atom_probs is aligned with tree.routes().
inline Rat edge_probability_from_atoms(const EventTree& tree, std::size_t edge, std::span<const Rat> atom_probs) {
  if (edge >= tree.edges().size()) throw Error(ErrorCode::InvalidArgument, "unknown edge index " + std::to_string(edge));
  auto routes = tree.routes();
  if (atom_probs.size() != routes.size())
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(routes.size()) + " atom probabilities");
  VertexId source = tree.edge(edge).source;
  Rat through_edge = 0, through_source = 0;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    bool uses_edge = false, uses_source = source == tree.root();
    for (auto e : routes[i].edges) {
      uses_edge |= e == edge;
      uses_source |= tree.edge(e).target == source;
    }
    if (uses_edge) through_edge += atom_probs[i];
    if (uses_source) through_source += atom_probs[i];
  }
  if (through_source == 0)
    throw Error(ErrorCode::ZeroDenominator, "no positive-probability route passes vertex " + std::to_string(source));
  return through_edge / through_source;
}

/// Product of edge probabilities on the unique path from -> to.
inline Rat subpath_probability(const EventTree& tree, VertexId from, VertexId to) {
  if (from >= tree.vertex_count() || to >= tree.vertex_count())
    throw Error(ErrorCode::NoSuchSubpath, "vertex out of range");
  Rat p = 1;
  VertexId at = to;
  while (at != from) {
    auto pe = tree.parent_edge(at);
    if (!pe) throw Error(ErrorCode::NoSuchSubpath, std::to_string(from) + " does not precede " + std::to_string(to));
    p *= tree.edge(*pe).prob;
    at = tree.edge(*pe).source;
  }
  return p;
}

}  // namespace ceg
