#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ceg/tree.hpp"

namespace ceg {

/// A vertex's outgoing (label, probability) pairs in label order. Two
/// situations share a stage exactly when their signatures are equal.
using FloretSignature = std::vector<std::pair<std::string, Rat>>;

using VertexClasses = std::vector<std::vector<VertexId>>;

struct PartitionResult {
  VertexClasses positions;
  VertexClasses stages;
  /// Colour per stage (aligned with `stages`); 0 marks a singleton stage.
  std::vector<std::size_t> colour;
};

inline FloretSignature floret_signature(const EventTree& tree, VertexId v) {
  FloretSignature sig;
  for (auto e : tree.out_edges(v)) sig.emplace_back(tree.edge(e).label, tree.edge(e).prob);
  return sig;
}

namespace detail {

// Groups vertices by key, sorting members and classes by smallest member.
template <class Key>
VertexClasses group_by(const std::vector<VertexId>& vertices, const std::vector<Key>& key_of) {
  std::map<Key, std::vector<VertexId>> groups;
  for (VertexId v : vertices) groups[key_of[v]].push_back(v);
  VertexClasses out;
  out.reserve(groups.size());
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace detail

inline VertexClasses compute_stages(const EventTree& tree) {
  std::vector<FloretSignature> key(tree.vertex_count());
  auto situations = tree.situations();
  for (VertexId v : situations) key[v] = floret_signature(tree, v);
  return detail::group_by(situations, key);
}

/// Subtree key ids for every vertex: leaves share key 0, and a situation's
/// key interns the ordered list of (label, prob, child key). Equal keys mean
/// label-identical futures with equal subpath probabilities.
inline std::vector<std::size_t> subtree_keys(const EventTree& tree) {
  using Entry = std::tuple<std::string, Rat, std::size_t>;
  std::map<std::vector<Entry>, std::size_t> intern;
  std::vector<std::size_t> key(tree.vertex_count(), 0);
  const auto& order = tree.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    if (tree.is_leaf(v)) continue;
    std::vector<Entry> sig;
    for (auto e : tree.out_edges(v)) sig.emplace_back(tree.edge(e).label, tree.edge(e).prob, key[tree.edge(e).target]);
    auto [pos, inserted] = intern.try_emplace(std::move(sig), intern.size() + 1);
    key[v] = pos->second;
  }
  return key;
}

inline VertexClasses compute_positions(const EventTree& tree) {
  return detail::group_by(tree.situations(), subtree_keys(tree));
}

/// Assigns colours 1, 2, ... to non-singleton stages in order of their
/// smallest member; singleton stages get 0.
inline std::vector<std::size_t> colouring(std::span<const std::vector<VertexId>> stages) {
  std::vector<std::size_t> order(stages.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto smallest = [&](std::size_t i) { return *std::min_element(stages[i].begin(), stages[i].end()); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return smallest(a) < smallest(b); });
  std::vector<std::size_t> colour(stages.size(), 0);
  std::size_t next = 1;
  for (auto i : order)
    if (stages[i].size() > 1) colour[i] = next++;
  return colour;
}

inline PartitionResult partition(const EventTree& tree) {
  PartitionResult r;
  r.positions = compute_positions(tree);
  r.stages = compute_stages(tree);
  r.colour = colouring(r.stages);
  return r;
}

}  // namespace ceg
