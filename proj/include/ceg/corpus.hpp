#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ceg/ceg.hpp"

// Exhaustive small-topology corpus: every single-root, single-sink DAG with
// parallel edges allowed and 1..3 out-edges per non-sink node, one
// representative per isomorphism class.
//
// Graphs grow by adding a new source node whose edges point into the
// existing graph (canonical augmentation). A child is kept only when the
// new node is the designated source of the child (removing the designated
// source gives back the parent's class); isomorphic siblings from one
// parent are dropped locally.

namespace ceg {

constexpr std::size_t kCorpusMaxNodes = 9;  // sink included

/// Internal form: node 0 is the sink, higher ids were added later, edges
/// run from higher to lower ids. m[i][j] is the number of i -> j edges.
struct Topology {
  std::size_t nodes = 1;
  std::array<std::array<std::uint8_t, kCorpusMaxNodes>, kCorpusMaxNodes> m{};

  std::size_t in_degree(std::size_t v) const {
    std::size_t d = 0;
    for (std::size_t i = 0; i < nodes; ++i) d += m[i][v];
    return d;
  }
  std::size_t sources() const {
    std::size_t s = 0;
    for (std::size_t v = 1; v < nodes; ++v) s += in_degree(v) == 0;
    return s;
  }
  Topology without(std::size_t v) const {
    Topology t;
    t.nodes = nodes - 1;
    for (std::size_t i = 0, a = 0; i < nodes; ++i) {
      if (i == v) continue;
      for (std::size_t j = 0, b = 0; j < nodes; ++j) {
        if (j == v) continue;
        t.m[a][b++] = m[i][j];
      }
      ++a;
    }
    return t;
  }
};

namespace detail {

struct Canonical {
  std::string key;
  std::vector<std::size_t> order;  // order[k] = node placed at canonical slot k
};

// Colour refinement by (height, in-degree, out-degree) and neighbour colour
// multisets, then the lexicographically smallest adjacency string over all
// orderings that respect the refined colour classes.
inline Canonical canonical_form(const Topology& t) {
  const std::size_t n = t.nodes;
  std::vector<std::size_t> height(n, 0);
  for (std::size_t v = 1; v < n; ++v)  // edges go to lower ids
    for (std::size_t j = 0; j < v; ++j)
      if (t.m[v][j]) height[v] = std::max(height[v], height[j] + 1);

  std::vector<std::size_t> colour(n);
  {
    std::map<std::array<std::size_t, 3>, std::size_t> ids;
    std::vector<std::array<std::size_t, 3>> key(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t out = 0;
      for (std::size_t j = 0; j < n; ++j) out += t.m[v][j];
      key[v] = {height[v], t.in_degree(v), out};
      ids[key[v]];
    }
    std::size_t next = 0;
    for (auto& [k, id] : ids) id = next++;
    for (std::size_t v = 0; v < n; ++v) colour[v] = ids[key[v]];
  }
  for (;;) {
    using Sig = std::pair<std::size_t, std::vector<std::size_t>>;
    std::vector<Sig> sig(n);
    std::map<Sig, std::size_t> ids;
    for (std::size_t v = 0; v < n; ++v) {
      sig[v].first = colour[v];
      for (std::size_t j = 0; j < n; ++j) {
        for (int c = 0; c < t.m[v][j]; ++c) sig[v].second.push_back(2 * colour[j]);
        for (int c = 0; c < t.m[j][v]; ++c) sig[v].second.push_back(2 * colour[j] + 1);
      }
      std::sort(sig[v].second.begin(), sig[v].second.end());
      ids[sig[v]];
    }
    std::size_t next = 0;
    for (auto& [k, id] : ids) id = next++;
    std::size_t before = *std::max_element(colour.begin(), colour.end()) + 1;
    for (std::size_t v = 0; v < n; ++v) colour[v] = ids[sig[v]];
    if (ids.size() == before) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return colour[a] < colour[b]; });
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && colour[order[j]] == colour[order[i]]) ++j;
    blocks.emplace_back(i, j);
    i = j;
  }
  Canonical best;
  std::string s(n * n, '\0');
  auto visit = [&](auto&& self, std::size_t b) -> void {
    if (b == blocks.size()) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s[i * n + j] = static_cast<char>('0' + t.m[order[i]][order[j]]);
      if (best.order.empty() || s < best.key) {
        best.key = s;
        best.order = order;
      }
      return;
    }
    auto [lo, hi] = blocks[b];
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi));
    do {
      self(self, b + 1);
    } while (std::next_permutation(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi)));
  };
  visit(visit, 0);
  best.key.insert(best.key.begin(), static_cast<char>('0' + n));
  return best;
}

}  // namespace detail

/// Calls `visit` once per isomorphism class of single-root topologies with
/// exactly `nonsink` non-sink nodes. Stops early when `visit` returns false;
/// returns whether the layer was completed.
inline bool enumerate_topologies(std::size_t nonsink, const std::function<bool(const Topology&)>& visit) {
  if (nonsink == 0 || nonsink + 1 > kCorpusMaxNodes) throw Error(ErrorCode::InvalidArgument, "unsupported corpus size");
  bool running = true;
  auto grow = [&](auto&& self, const Topology& g, const std::string& key) -> void {
    const std::size_t have = g.nodes - 1;
    if (have == nonsink) {
      if (g.sources() == 1) running = visit(g);
      return;
    }
    std::set<std::string> seen;
    std::vector<std::size_t> pick;
    auto choose = [&](auto&& rec, std::size_t size, std::size_t from) -> void {
      if (!running) return;
      if (pick.size() == size) {
        Topology h = g;
        h.nodes = g.nodes + 1;
        const std::size_t v = g.nodes;
        for (auto j : pick) ++h.m[v][j];
        const std::size_t remaining = nonsink - (have + 1);
        if (h.sources() > 1 + 2 * remaining) return;
        auto c = detail::canonical_form(h);
        if (!seen.insert(c.key).second) return;
        std::size_t designated = v;
        for (auto it = c.order.rbegin(); it != c.order.rend(); ++it)
          if (*it != 0 && h.in_degree(*it) == 0) {
            designated = *it;
            break;
          }
        if (designated != v && detail::canonical_form(h.without(designated)).key != key) return;
        self(self, h, c.key);
        return;
      }
      for (std::size_t j = from; j < g.nodes; ++j) {
        pick.push_back(j);
        rec(rec, size, j);
        pick.pop_back();
      }
    };
    for (std::size_t size = 1; size <= 3 && running; ++size) choose(choose, size, 0);
  };
  Topology sink_only;
  grow(grow, sink_only, detail::canonical_form(sink_only).key);
  return running;
}

/// Turns a topology into a simple CEG. The source becomes position 0, the
/// sink the last id; each edge is labelled "<position>.<k>". Probabilities
/// are random weights in [1, 97] normalised per position.
inline Ceg topology_to_ceg(const Topology& t, std::mt19937_64& rng) {
  const std::size_t last = t.nodes - 1;
  auto id = [&](std::size_t v) { return static_cast<PositionId>(last - v); };
  std::uniform_int_distribution<std::uint32_t> pick(1, 97);
  std::vector<CegEdge> edges;
  for (std::size_t v = last; v >= 1; --v) {
    std::vector<std::pair<std::size_t, std::uint32_t>> out;
    std::uint64_t total = 0;
    for (std::size_t j = t.nodes; j-- > 0;)
      for (int c = 0; c < t.m[v][j]; ++c) {
        auto w = pick(rng);
        total += w;
        out.emplace_back(j, w);
      }
    for (std::size_t k = 0; k < out.size(); ++k)
      edges.push_back({id(v), id(out[k].first), std::to_string(id(v)) + "." + std::to_string(k),
                       Rat(out[k].second) / Rat(total)});
  }
  return Ceg::build(t.nodes, id(0), std::move(edges));
}

}  // namespace ceg
