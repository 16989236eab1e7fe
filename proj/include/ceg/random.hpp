#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ceg/ceg.hpp"
#include "ceg/conditioning.hpp"
#include "ceg/tree.hpp"

// Seeded generators for property tests and the verification suites.

namespace ceg {

namespace detail {

inline std::vector<Rat> random_distribution(std::mt19937_64& rng, std::size_t n, std::uint32_t max_weight) {
  std::uniform_int_distribution<std::uint32_t> pick(1, max_weight);
  std::vector<std::uint32_t> w(n);
  std::uint64_t total = 0;
  for (auto& x : w) total += (x = pick(rng));
  std::vector<Rat> out;
  for (auto x : w) out.emplace_back(Rat(x) / Rat(total));
  return out;
}

inline std::string edge_label(std::size_t k) { return std::string(1, static_cast<char>('a' + k)); }

}  // namespace detail

struct RandomTreeOptions {
  std::size_t max_depth = 4;
  std::size_t max_children = 3;
  /// Chance that a situation reuses a floret from the shared pool instead of
  /// drawing fresh probabilities; reuse plants stage and position ties.
  double reuse = 0.5;
  std::size_t pool_size = 3;
  std::size_t max_vertices = 200;
};

/// Random event tree. Labels at each floret are "a", "b", ...
inline EventTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opt = {}) {
  std::vector<std::vector<Rat>> pool;
  std::uniform_int_distribution<std::size_t> kids(2, std::max<std::size_t>(2, opt.max_children));
  for (std::size_t k = 0; k < opt.pool_size; ++k) pool.push_back(detail::random_distribution(rng, kids(rng), 6));
  std::bernoulli_distribution reuse(opt.reuse);
  std::bernoulli_distribution stop(0.3);

  std::vector<TreeEdge> edges;
  std::size_t n = 1;
  std::vector<std::pair<VertexId, std::size_t>> frontier{{0, 0}};  // vertex, depth
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    auto [v, depth] = frontier[head];
    bool leaf = depth > 0 && (depth >= opt.max_depth || stop(rng) || n >= opt.max_vertices);
    if (leaf) continue;
    std::vector<Rat> probs;
    if (reuse(rng)) {
      probs = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    } else {
      probs = detail::random_distribution(rng, kids(rng), 6);
    }
    for (std::size_t k = 0; k < probs.size(); ++k) {
      auto child = static_cast<VertexId>(n++);
      edges.push_back({v, child, detail::edge_label(k), probs[k]});
      frontier.emplace_back(child, depth + 1);
    }
  }
  return EventTree::build(n, std::move(edges));
}

struct RandomCegOptions {
  std::size_t min_positions = 2;  // non-sink positions
  std::size_t max_positions = 11;
  std::size_t max_out = 3;
  std::uint32_t max_weight = 97;
  std::size_t max_atoms = 4000;
};

/// Random simple CEG with generic probabilities: n non-sink positions in
/// topological order, 1..max_out labelled edges each, every position
/// reachable from the root. Labels are "<position>.<k>" so no two
/// positions can coalesce. Redraws when the atom count exceeds the limit.
inline Ceg random_sceg(std::mt19937_64& rng, const RandomCegOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> size(opt.min_positions, opt.max_positions);
  for (;;) {
    const std::size_t n = size(rng);
    const auto sink = static_cast<PositionId>(n);
    std::vector<std::vector<PositionId>> targets(n);
    std::vector<bool> has_parent(n + 1, false);
    std::uniform_int_distribution<std::size_t> degree(1, opt.max_out);
    for (std::size_t v = 0; v < n; ++v) {
      std::uniform_int_distribution<std::size_t> after(v + 1, n);
      std::size_t d = degree(rng);
      for (std::size_t k = 0; k < d; ++k) targets[v].push_back(static_cast<PositionId>(after(rng)));
    }
    // Give every orphan a parent by redirecting a random earlier edge, or
    // adding one when the chosen parent has spare degree.
    for (std::size_t v = 1; v < n; ++v) {
      for (std::size_t u = 0; u < v; ++u)
        for (auto t : targets[u]) has_parent[t] = true;
      if (has_parent[v]) continue;
      std::uniform_int_distribution<std::size_t> parent(0, v - 1);
      auto u = parent(rng);
      if (targets[u].size() < opt.max_out) {
        targets[u].push_back(static_cast<PositionId>(v));
      } else {
        std::uniform_int_distribution<std::size_t> slot(0, targets[u].size() - 1);
        targets[u][slot(rng)] = static_cast<PositionId>(v);
      }
      // A redirect may orphan an earlier vertex; restart the sweep.
      std::fill(has_parent.begin(), has_parent.end(), false);
      v = 0;
    }
    std::vector<CegEdge> edges;
    for (std::size_t v = 0; v < n; ++v) {
      auto probs = detail::random_distribution(rng, targets[v].size(), opt.max_weight);
      for (std::size_t k = 0; k < targets[v].size(); ++k)
        edges.push_back({static_cast<PositionId>(v), targets[v][k], std::to_string(v) + "." + detail::edge_label(k), probs[k]});
    }
    auto g = Ceg::build(n + 1, sink, std::move(edges));
    auto down = paths_to_sink(g);
    if (down[g.root()] <= opt.max_atoms) return g;
  }
}

/// Random compiled CEG: a random tree with planted floret ties, compiled.
/// Redraws until the position count (sink included) is within bounds.
inline Ceg random_compiled_ceg(std::mt19937_64& rng, std::size_t max_positions = 12,
                               const RandomTreeOptions& opt = {}) {
  for (;;) {
    auto g = compile(random_tree(rng, opt));
    if (g.position_count() <= max_positions && g.position_count() >= 3) return g;
  }
}

/// Random intrinsic event built from the intrinsic primitives: a single
/// atom, THROUGH(w), THROUGH(w, w'), EDGE, a subpath, or an intersection of
/// two of these. Never empty.
inline EventExpr random_intrinsic_expr(const Ceg& g, std::span<const Atom> atoms, std::mt19937_64& rng) {
  auto pick_atom = [&] { return std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng); };
  auto primitive = [&]() -> EventExpr {
    const auto& a = atoms[pick_atom()];
    std::uniform_int_distribution<std::size_t> at(0, a.edges.size() - 1);
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
      case 0: {
        std::size_t i = pick_atom();
        return EventExpr::atoms({i});
      }
      case 1: return EventExpr::through(g.edge(a.edges[at(rng)]).source);
      case 2: {
        auto i = at(rng), j = at(rng);
        if (i > j) std::swap(i, j);
        return EventExpr::through(g.edge(a.edges[i]).source, g.edge(a.edges[j]).target);
      }
      case 3: {
        const auto& e = g.edge(a.edges[at(rng)]);
        return EventExpr::edge(e.source, e.target, e.label);
      }
      default: {
        auto i = at(rng), j = at(rng);
        if (i > j) std::swap(i, j);
        std::vector<EdgeRef> path;
        for (auto k = i; k <= j; ++k) {
          const auto& e = g.edge(a.edges[k]);
          path.push_back({e.source, e.target, e.label});
        }
        return EventExpr::subpath(std::move(path));
      }
    }
  };
  for (;;) {
    auto x = primitive();
    if (std::bernoulli_distribution(0.4)(rng)) x = EventExpr::intersection_of({x, primitive()});
    if (!build_event(g, atoms, x).empty()) return x;
  }
}

}  // namespace ceg
