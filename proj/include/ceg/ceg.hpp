#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ceg/staging.hpp"
#include "ceg/tree.hpp"

namespace ceg {

using PositionId = std::uint32_t;

struct CegEdge {
  PositionId source = 0;
  PositionId target = 0;
  std::string label;
  Rat prob;
};

using PositionClasses = std::vector<std::vector<PositionId>>;

/// Chain event graph: a single-root (id 0), single-sink DAG of positions.
/// Parallel edges are allowed and told apart by label; an edge's index in
/// edges() is its identity.
class Ceg {
 public:
  /// Validates and builds. `stages` lists non-singleton stage classes; any
  /// position not mentioned is a stage of its own.
  static Ceg build(std::size_t position_count, PositionId sink, std::vector<CegEdge> edges,
                   const PositionClasses& stages = {});

  std::size_t position_count() const { return out_.size(); }
  PositionId root() const { return 0; }
  PositionId sink() const { return sink_; }
  const std::vector<CegEdge>& edges() const { return edges_; }
  const CegEdge& edge(std::size_t i) const { return edges_.at(i); }
  /// Outgoing edge indices, sorted by label.
  std::span<const std::size_t> out_edges(PositionId w) const { return out_.at(w); }
  std::span<const std::size_t> in_edges(PositionId w) const { return in_.at(w); }
  /// All positions, root first and sink last, parents before children.
  const std::vector<PositionId>& topological_order() const { return topo_; }

  /// Every stage class, singletons included, ordered by smallest member.
  const PositionClasses& stages() const { return stages_; }
  std::size_t stage_of(PositionId w) const { return stage_of_.at(w); }
  /// 0 for positions in singleton stages.
  std::size_t colour(PositionId w) const { return stage_colour_.at(stage_of_.at(w)); }

  /// Same graph with the stage structure dropped (a simple CEG).
  Ceg uncoloured() const { return build(position_count(), sink_, edges_); }

  bool contains(PositionId w) const { return w < position_count(); }

 private:
  PositionId sink_ = 0;
  std::vector<CegEdge> edges_;
  std::vector<std::vector<std::size_t>> out_, in_;
  std::vector<PositionId> topo_;
  PositionClasses stages_;
  std::vector<std::size_t> stage_of_;
  std::vector<std::size_t> stage_colour_;
};

inline Ceg Ceg::build(std::size_t position_count, PositionId sink, std::vector<CegEdge> edges,
                      const PositionClasses& stages) {
  auto where = [](PositionId w) { return "position " + std::to_string(w); };
  if (position_count < 2) throw Error(ErrorCode::InvalidStructure, "a CEG needs a root and a sink");
  if (sink >= position_count || sink == 0)
    throw Error(ErrorCode::InvalidStructure, "sink id " + std::to_string(sink) + " is invalid");

  Ceg g;
  g.sink_ = sink;
  g.out_.assign(position_count, {});
  g.in_.assign(position_count, {});
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.source >= position_count || e.target >= position_count)
      throw Error(ErrorCode::UnknownPosition, "edge " + std::to_string(i) + " references position " +
                                                  std::to_string(std::max(e.source, e.target)));
    if (e.prob <= 0)
      throw Error(ErrorCode::NonpositiveProb, "edge " + std::to_string(i) + " has probability " + to_string(e.prob));
    if (e.source == e.target) throw Error(ErrorCode::CycleDetected, where(e.source) + " has a self loop");
    g.out_[e.source].push_back(i);
    g.in_[e.target].push_back(i);
  }
  g.edges_ = std::move(edges);

  if (!g.in_[0].empty()) throw Error(ErrorCode::InvalidStructure, "the root has incoming edges");
  if (!g.out_[sink].empty()) throw Error(ErrorCode::InvalidStructure, "the sink has outgoing edges");
  for (PositionId w = 0; w < position_count; ++w) {
    if (w != sink && g.out_[w].empty()) throw Error(ErrorCode::InvalidStructure, where(w) + " has no outgoing edges");
    if (w != 0 && g.in_[w].empty()) throw Error(ErrorCode::InvalidStructure, where(w) + " is unreachable from the root");
  }

  // Kahn's algorithm; anything left over sits on a cycle.
  std::vector<std::size_t> indeg(position_count);
  for (PositionId w = 0; w < position_count; ++w) indeg[w] = g.in_[w].size();
  std::priority_queue<PositionId, std::vector<PositionId>, std::greater<>> ready;
  ready.push(0);
  while (!ready.empty()) {
    PositionId w = ready.top();
    ready.pop();
    if (w == sink) continue;
    g.topo_.push_back(w);
    for (auto e : g.out_[w])
      if (--indeg[g.edges_[e].target] == 0) ready.push(g.edges_[e].target);
  }
  if (g.topo_.size() + 1 != position_count || indeg[sink] != 0)
    throw Error(ErrorCode::CycleDetected, "the edge set contains a directed cycle");
  g.topo_.push_back(sink);

  for (PositionId w = 0; w < position_count; ++w) {
    auto& out = g.out_[w];
    std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return g.edges_[a].label < g.edges_[b].label; });
    for (std::size_t k = 1; k < out.size(); ++k)
      if (g.edges_[out[k]].label == g.edges_[out[k - 1]].label)
        throw Error(ErrorCode::DuplicateSiblingLabel, where(w) + " has two edges labelled '" + g.edges_[out[k]].label + "'");
    if (!out.empty()) {
      Rat sum = 0;
      for (auto e : out) sum += g.edges_[e].prob;
      if (sum != 1) throw Error(ErrorCode::ProbSumNotOne, "outgoing probabilities of " + where(w) + " sum to " + to_string(sum));
    }
  }

  constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> stage(position_count, unassigned);
  PositionClasses classes;
  for (const auto& cls : stages) {
    if (cls.empty()) continue;
    std::vector<PositionId> members(cls.begin(), cls.end());
    std::sort(members.begin(), members.end());
    for (auto w : members) {
      if (w >= position_count || w == sink) throw Error(ErrorCode::UnknownPosition, "stage member " + std::to_string(w) + " is not a situation");
      if (stage[w] != unassigned) throw Error(ErrorCode::InvalidStructure, where(w) + " appears in two stages");
      stage[w] = classes.size();
    }
    auto floret = [&](PositionId w) {
      std::vector<std::pair<std::string, Rat>> f;
      for (auto e : g.out_[w]) f.emplace_back(g.edges_[e].label, g.edges_[e].prob);
      return f;
    };
    for (auto w : members)
      if (floret(w) != floret(members.front()))
        throw Error(ErrorCode::InvalidStructure, where(w) + " and " + where(members.front()) + " share a stage but not a floret");
    classes.push_back(std::move(members));
  }
  for (PositionId w = 0; w < position_count; ++w)
    if (w != sink && stage[w] == unassigned) classes.push_back({w});
  std::sort(classes.begin(), classes.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  g.stage_of_.assign(position_count, unassigned);
  for (std::size_t s = 0; s < classes.size(); ++s)
    for (auto w : classes[s]) g.stage_of_[w] = s;
  g.stage_colour_ = colouring(classes);
  g.stages_ = std::move(classes);
  return g;
}

/// Non-singleton stage classes (the form serialized to disk).
inline PositionClasses coloured_stages(const Ceg& g) {
  PositionClasses out;
  for (const auto& s : g.stages())
    if (s.size() > 1) out.push_back(s);
  return out;
}

/// Compiles a staged tree: positions become CEG vertices, leaves collapse
/// into the sink, and each position keeps one edge per outgoing label.
/// Ids follow a topological order; ties go to the smallest incoming
/// (label, source) pair. The sink is always the last id.
inline Ceg compile(const EventTree& tree) {
  auto keys = subtree_keys(tree);
  auto positions = compute_positions(tree);
  const std::size_t n = positions.size();
  const std::size_t sink_old = n;

  std::vector<std::size_t> class_of(tree.vertex_count(), sink_old);
  for (std::size_t c = 0; c < n; ++c)
    for (auto v : positions[c]) class_of[v] = c;

  struct Proto {
    std::size_t source, target;
    std::string label;
    Rat prob;
  };
  std::vector<Proto> proto;
  for (std::size_t c = 0; c < n; ++c) {
    VertexId rep = positions[c].front();
    for (auto e : tree.out_edges(rep)) {
      const auto& te = tree.edge(e);
      proto.push_back({c, class_of[te.target], te.label, te.prob});
    }
  }
  (void)keys;

  std::vector<std::vector<std::size_t>> out(n + 1), in(n + 1);
  for (std::size_t i = 0; i < proto.size(); ++i) {
    out[proto[i].source].push_back(i);
    in[proto[i].target].push_back(i);
  }
  std::vector<std::size_t> new_id(n + 1, static_cast<std::size_t>(-1));
  std::vector<std::size_t> pending(n + 1);
  for (std::size_t c = 0; c <= n; ++c) pending[c] = in[c].size();

  using Key = std::tuple<std::string, std::size_t, std::size_t>;  // label, source id, old id
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  std::size_t root_old = class_of[tree.root()];
  ready.emplace("", 0, root_old);
  std::size_t next = 0;
  while (!ready.empty()) {
    auto [label, src, c] = ready.top();
    ready.pop();
    new_id[c] = next++;
    for (auto i : out[c]) {
      auto t = proto[i].target;
      if (--pending[t] == 0 && t != sink_old) {
        Key best{proto[in[t].front()].label, new_id[proto[in[t].front()].source], t};
        for (auto j : in[t]) best = std::min(best, Key{proto[j].label, new_id[proto[j].source], t});
        ready.push(best);
      }
    }
  }
  new_id[sink_old] = next;

  std::vector<CegEdge> edges;
  edges.reserve(proto.size());
  for (const auto& p : proto)
    edges.push_back({static_cast<PositionId>(new_id[p.source]), static_cast<PositionId>(new_id[p.target]), p.label, p.prob});
  std::sort(edges.begin(), edges.end(), [](const CegEdge& a, const CegEdge& b) {
    return std::tie(a.source, a.label) < std::tie(b.source, b.label);
  });

  // Positions inherit the stage of their member vertices.
  std::map<FloretSignature, std::vector<PositionId>> by_floret;
  for (std::size_t c = 0; c < n; ++c)
    by_floret[floret_signature(tree, positions[c].front())].push_back(static_cast<PositionId>(new_id[c]));
  PositionClasses stages;
  for (auto& [sig, members] : by_floret)
    if (members.size() > 1) stages.push_back(members);

  return Ceg::build(n + 1, static_cast<PositionId>(n), std::move(edges), stages);
}

/// Expands a CEG back into its event tree (one tree vertex per path prefix).
inline EventTree unfold(const Ceg& g) {
  std::vector<TreeEdge> edges;
  std::size_t next = 1;
  auto visit = [&](auto&& self, PositionId w, VertexId v) -> void {
    for (auto e : g.out_edges(w)) {
      const auto& ce = g.edge(e);
      VertexId child = static_cast<VertexId>(next++);
      edges.push_back({v, child, ce.label, ce.prob});
      if (ce.target != g.sink()) self(self, ce.target, child);
    }
  };
  visit(visit, g.root(), 0);
  return EventTree::build(next, std::move(edges));
}

/// Recursive signature key per position (sink = 0). Two positions with the
/// same key have identical labelled futures with identical probabilities.
inline std::vector<std::size_t> future_keys(const Ceg& g) {
  using Entry = std::tuple<std::string, Rat, std::size_t>;
  std::map<std::vector<Entry>, std::size_t> intern;
  std::vector<std::size_t> key(g.position_count(), 0);
  const auto& topo = g.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    if (*it == g.sink()) continue;
    std::vector<Entry> sig;
    for (auto e : g.out_edges(*it)) sig.emplace_back(g.edge(e).label, g.edge(e).prob, key[g.edge(e).target]);
    key[*it] = intern.try_emplace(std::move(sig), intern.size() + 1).first->second;
  }
  return key;
}

/// True when no two distinct positions should have been coalesced.
inline bool is_maximally_coalesced(const Ceg& g) {
  auto key = future_keys(g);
  std::set<std::size_t> seen;
  for (PositionId w = 0; w < g.position_count(); ++w)
    if (w != g.sink() && !seen.insert(key[w]).second) return false;
  return true;
}

/// Follows a label sequence from the root; nullopt when some label is absent.
inline std::optional<PositionId> walk(const Ceg& g, std::span<const std::string> labels) {
  PositionId at = g.root();
  for (const auto& l : labels) {
    bool found = false;
    for (auto e : g.out_edges(at))
      if (g.edge(e).label == l) {
        at = g.edge(e).target;
        found = true;
        break;
      }
    if (!found) return std::nullopt;
  }
  return at;
}

inline std::optional<PositionId> walk(const Ceg& g, std::initializer_list<std::string> labels) {
  std::vector<std::string> v(labels);
  return walk(g, std::span<const std::string>(v));
}

// ---------------------------------------------------------------------------
// Atoms and events

/// A root-to-sink path, as edge indices.
struct Atom {
  std::vector<std::size_t> edges;

  friend bool operator==(const Atom&, const Atom&) = default;
};

constexpr std::size_t kDefaultAtomCap = 1000000;

/// CEG_ATOM_CAP overrides the default cap of 10^6 atoms.
inline std::size_t default_atom_cap() {
  if (const char* env = std::getenv("CEG_ATOM_CAP")) {
    char* end = nullptr;
    auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultAtomCap;
}

/// All root-to-sink paths, ordered lexicographically by label sequence.
inline std::vector<Atom> enumerate_atoms(const Ceg& g, std::size_t cap = default_atom_cap()) {
  std::vector<Atom> out;
  std::vector<std::size_t> path;
  auto visit = [&](auto&& self, PositionId w) -> void {
    if (w == g.sink()) {
      if (out.size() == cap)
        throw Error(ErrorCode::AtomLimitExceeded, "more than " + std::to_string(cap) + " atoms");
      out.push_back(Atom{path});
      return;
    }
    for (auto e : g.out_edges(w)) {
      path.push_back(e);
      self(self, g.edge(e).target);
      path.pop_back();
    }
  };
  visit(visit, g.root());
  return out;
}

inline Rat atom_probability(const Ceg& g, const Atom& a) {
  Rat p = 1;
  for (auto e : a.edges) p *= g.edge(e).prob;
  return p;
}

inline bool atom_visits(const Ceg& g, const Atom& a, PositionId w) {
  if (w == g.root()) return true;
  for (auto e : a.edges)
    if (g.edge(e).target == w) return true;
  return false;
}

/// A set of atoms, stored as sorted indices into enumerate_atoms(ceg).
struct Event {
  std::vector<std::size_t> atoms;

  bool empty() const { return atoms.empty(); }
  std::size_t size() const { return atoms.size(); }
  bool contains(std::size_t atom) const { return std::binary_search(atoms.begin(), atoms.end(), atom); }

  static Event all(std::size_t atom_count) {
    Event ev;
    ev.atoms.resize(atom_count);
    for (std::size_t i = 0; i < atom_count; ++i) ev.atoms[i] = i;
    return ev;
  }
  static Event from_mask(const std::vector<bool>& mask) {
    Event ev;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) ev.atoms.push_back(i);
    return ev;
  }

  friend bool operator==(const Event&, const Event&) = default;
};

inline Event intersect(const Event& a, const Event& b) {
  Event out;
  std::set_intersection(a.atoms.begin(), a.atoms.end(), b.atoms.begin(), b.atoms.end(), std::back_inserter(out.atoms));
  return out;
}

struct EdgeRef {
  PositionId source = 0;
  PositionId target = 0;
  std::string label;
};

/// Intensional event description, materialized by build_event.
struct EventExpr {
  enum class Op { Atoms, Through, ThroughPair, Edge, Subpath, Label, Union, Intersection, Complement };

  Op op = Op::Atoms;
  std::vector<PositionId> positions;
  std::vector<EdgeRef> edges;
  std::string label;
  std::vector<std::size_t> atom_ids;
  std::vector<EventExpr> args;

  static EventExpr atoms(std::vector<std::size_t> ids) {
    EventExpr x(Op::Atoms);
    x.atom_ids = std::move(ids);
    return x;
  }
  static EventExpr through(PositionId w) {
    EventExpr x(Op::Through);
    x.positions = {w};
    return x;
  }
  static EventExpr through(PositionId w, PositionId w2) {
    EventExpr x(Op::ThroughPair);
    x.positions = {w, w2};
    return x;
  }
  static EventExpr edge(PositionId w, PositionId w2, std::string label) {
    EventExpr x(Op::Edge);
    x.edges = {EdgeRef{w, w2, std::move(label)}};
    return x;
  }
  static EventExpr subpath(std::vector<EdgeRef> path) {
    EventExpr x(Op::Subpath);
    x.edges = std::move(path);
    return x;
  }
  static EventExpr with_label(std::string l) {
    EventExpr x(Op::Label);
    x.label = std::move(l);
    return x;
  }
  static EventExpr union_of(std::vector<EventExpr> parts) {
    EventExpr x(Op::Union);
    x.args = std::move(parts);
    return x;
  }
  static EventExpr intersection_of(std::vector<EventExpr> parts) {
    EventExpr x(Op::Intersection);
    x.args = std::move(parts);
    return x;
  }
  static EventExpr complement(EventExpr inner) {
    EventExpr x(Op::Complement);
    x.args.push_back(std::move(inner));
    return x;
  }

  EventExpr() = default;

 private:
  explicit EventExpr(Op o) : op(o) {}
};

inline std::size_t find_edge(const Ceg& g, const EdgeRef& ref) {
  if (!g.contains(ref.source) || !g.contains(ref.target))
    throw Error(ErrorCode::UnknownPosition, "position " + std::to_string(std::max(ref.source, ref.target)) + " does not exist");
  for (auto e : g.out_edges(ref.source))
    if (g.edge(e).target == ref.target && g.edge(e).label == ref.label) return e;
  throw Error(ErrorCode::UnknownEdge, "no edge " + std::to_string(ref.source) + "->" + std::to_string(ref.target) +
                                          " labelled '" + ref.label + "'");
}

namespace detail {

inline std::vector<bool> evaluate(const Ceg& g, std::span<const Atom> atoms, const EventExpr& x) {
  using Op = EventExpr::Op;
  std::vector<bool> m(atoms.size(), false);
  auto check_position = [&](PositionId w) {
    if (!g.contains(w)) throw Error(ErrorCode::UnknownPosition, "position " + std::to_string(w) + " does not exist");
  };
  switch (x.op) {
    case Op::Atoms:
      for (auto id : x.atom_ids) {
        if (id >= atoms.size()) throw Error(ErrorCode::InvalidArgument, "atom id " + std::to_string(id) + " out of range");
        m[id] = true;
      }
      break;
    case Op::Through:
    case Op::ThroughPair:
      for (auto w : x.positions) check_position(w);
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        bool all = true;
        for (auto w : x.positions) all = all && atom_visits(g, atoms[i], w);
        m[i] = all;
      }
      break;
    case Op::Edge:
    case Op::Subpath: {
      if (x.edges.empty()) throw Error(ErrorCode::InvalidArgument, "empty subpath");
      std::vector<std::size_t> seq;
      for (const auto& ref : x.edges) seq.push_back(find_edge(g, ref));
      for (std::size_t k = 1; k < seq.size(); ++k)
        if (g.edge(seq[k - 1]).target != g.edge(seq[k]).source)
          throw Error(ErrorCode::UnknownEdge, "subpath edges do not chain");
      for (std::size_t i = 0; i < atoms.size(); ++i)
        m[i] = std::search(atoms[i].edges.begin(), atoms[i].edges.end(), seq.begin(), seq.end()) != atoms[i].edges.end();
      break;
    }
    case Op::Label:
      for (std::size_t i = 0; i < atoms.size(); ++i)
        for (auto e : atoms[i].edges)
          if (g.edge(e).label == x.label) m[i] = true;
      break;
    case Op::Union:
      for (const auto& a : x.args) {
        auto sub = evaluate(g, atoms, a);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] || sub[i];
      }
      break;
    case Op::Intersection:
      m.assign(atoms.size(), true);
      for (const auto& a : x.args) {
        auto sub = evaluate(g, atoms, a);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] && sub[i];
      }
      break;
    case Op::Complement: {
      if (x.args.size() != 1) throw Error(ErrorCode::InvalidArgument, "complement takes one argument");
      auto sub = evaluate(g, atoms, x.args.front());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = !sub[i];
      break;
    }
  }
  return m;
}

}  // namespace detail

inline Event build_event(const Ceg& g, std::span<const Atom> atoms, const EventExpr& expr) {
  return Event::from_mask(detail::evaluate(g, atoms, expr));
}

inline Event build_event(const Ceg& g, const EventExpr& expr) {
  auto atoms = enumerate_atoms(g);
  return build_event(g, atoms, expr);
}

inline Rat event_probability(const Ceg& g, std::span<const Atom> atoms, const Event& ev) {
  Rat p = 0;
  for (auto id : ev.atoms) p += atom_probability(g, atoms[id]);
  return p;
}

inline Rat event_probability(const Ceg& g, const Event& ev) {
  auto atoms = enumerate_atoms(g);
  return event_probability(g, atoms, ev);
}

/// Probability of reaching w2 given w: the sum over all w -> w2 subpaths of
/// their edge-probability products.
inline Rat transition_probability(const Ceg& g, PositionId w, PositionId w2) {
  if (!g.contains(w) || !g.contains(w2))
    throw Error(ErrorCode::UnknownPosition, "position " + std::to_string(std::max(w, w2)) + " does not exist");
  std::vector<Rat> mass(g.position_count(), Rat(0));
  mass[w] = 1;
  for (auto v : g.topological_order()) {
    if (mass[v] == 0) continue;
    for (auto e : g.out_edges(v)) mass[g.edge(e).target] += mass[v] * g.edge(e).prob;
  }
  return mass[w2];
}

// ---------------------------------------------------------------------------
// Path counting and reachability

/// Number of root -> w paths for every w.
inline std::vector<BigCount> paths_from_root(const Ceg& g) {
  std::vector<BigCount> n(g.position_count(), BigCount(0));
  n[g.root()] = 1;
  for (auto w : g.topological_order())
    for (auto e : g.out_edges(w)) n[g.edge(e).target] += n[w];
  return n;
}

/// Number of w -> sink paths for every w.
inline std::vector<BigCount> paths_to_sink(const Ceg& g) {
  std::vector<BigCount> n(g.position_count(), BigCount(0));
  n[g.sink()] = 1;
  const auto& topo = g.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it)
    for (auto e : g.out_edges(*it)) n[*it] += n[g.edge(e).target];
  return n;
}

/// reach[a][b] is true when a directed path a -> b of length >= 1 exists.
inline std::vector<std::vector<bool>> reachability(const Ceg& g) {
  const auto n = g.position_count();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  const auto& topo = g.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    auto& row = reach[*it];
    for (auto e : g.out_edges(*it)) {
      auto t = g.edge(e).target;
      row[t] = true;
      for (std::size_t k = 0; k < n; ++k)
        if (reach[t][k]) row[k] = true;
    }
  }
  return reach;
}

/// True when every atom meets exactly one member of the set.
inline bool partitions_atoms(const Ceg& g, std::span<const PositionId> members) {
  if (members.empty()) return false;
  auto reach = reachability(g);
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = 0; j < members.size(); ++j)
      if (members[i] == members[j] ? i != j : static_cast<bool>(reach[members[i]][members[j]])) return false;
  auto up = paths_from_root(g);
  auto down = paths_to_sink(g);
  BigCount through = 0;
  for (auto w : members) through += up[w] * down[w];
  return through == down[g.root()];
}

/// Cuts the graph at a frontier that every atom crosses exactly once: the
/// frontier positions become the new sink, everything downstream is dropped,
/// and positions are recomputed so newly equivalent ones coalesce.
inline Ceg curtail(const Ceg& g, std::span<const PositionId> frontier) {
  for (auto w : frontier)
    if (!g.contains(w)) throw Error(ErrorCode::UnknownPosition, "position " + std::to_string(w) + " does not exist");
  std::set<PositionId> front(frontier.begin(), frontier.end());
  if (front.size() == 1 && *front.begin() == g.sink()) return g;
  if (front.count(g.root()) || front.count(g.sink()) || !partitions_atoms(g, frontier))
    throw Error(ErrorCode::NotAFrontier, "the positions do not split every atom exactly once");

  std::vector<PositionId> new_id(g.position_count(), static_cast<PositionId>(-1));
  std::vector<PositionId> kept;
  std::vector<PositionId> stack{g.root()};
  new_id[g.root()] = 0;
  kept.push_back(g.root());
  while (!stack.empty()) {
    auto w = stack.back();
    stack.pop_back();
    for (auto e : g.out_edges(w)) {
      auto t = g.edge(e).target;
      if (front.count(t) || new_id[t] != static_cast<PositionId>(-1)) continue;
      new_id[t] = static_cast<PositionId>(kept.size());
      kept.push_back(t);
      stack.push_back(t);
    }
  }
  const auto sink = static_cast<PositionId>(kept.size());
  std::vector<CegEdge> edges;
  for (auto w : kept)
    for (auto e : g.out_edges(w)) {
      const auto& ce = g.edge(e);
      edges.push_back({new_id[w], front.count(ce.target) ? sink : new_id[ce.target], ce.label, ce.prob});
    }
  auto truncated = Ceg::build(kept.size() + 1, sink, std::move(edges));
  return compile(unfold(truncated));
}

}  // namespace ceg
