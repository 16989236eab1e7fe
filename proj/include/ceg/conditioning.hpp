#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ceg/ceg.hpp"

namespace ceg {

/// Positions and edges of a CEG lying on at least one atom of an event,
/// plus the number of root-to-sink paths through the retained edges.
struct EventSubgraph {
  std::vector<bool> position_kept;
  std::vector<bool> edge_kept;
  BigCount path_count;
  std::size_t atom_count = 0;
};

inline EventSubgraph event_subgraph(const Ceg& g, std::span<const Atom> atoms, const Event& ev) {
  if (ev.empty()) throw Error(ErrorCode::EmptyEvent, "the event has no atoms");
  EventSubgraph s;
  s.position_kept.assign(g.position_count(), false);
  s.edge_kept.assign(g.edges().size(), false);
  s.atom_count = ev.size();
  s.position_kept[g.root()] = true;
  for (auto id : ev.atoms) {
    if (id >= atoms.size()) throw Error(ErrorCode::InvalidArgument, "atom id " + std::to_string(id) + " out of range");
    for (auto e : atoms[id].edges) {
      s.edge_kept[e] = true;
      s.position_kept[g.edge(e).target] = true;
    }
  }
  std::vector<BigCount> n(g.position_count(), BigCount(0));
  n[g.root()] = 1;
  for (auto w : g.topological_order())
    for (auto e : g.out_edges(w))
      if (s.edge_kept[e]) n[g.edge(e).target] += n[w];
  s.path_count = n[g.sink()];
  return s;
}

struct IntrinsicReport {
  BigCount paths;
  std::size_t atoms = 0;
  bool intrinsic() const { return paths == atoms; }
};

inline IntrinsicReport intrinsic_report(const Ceg& g, std::span<const Atom> atoms, const Event& ev) {
  auto s = event_subgraph(g, atoms, ev);
  return {s.path_count, s.atom_count};
}

inline bool is_intrinsic(const Ceg& g, std::span<const Atom> atoms, const Event& ev) {
  return intrinsic_report(g, atoms, ev).intrinsic();
}

inline bool is_intrinsic(const Ceg& g, const Event& ev) {
  auto atoms = enumerate_atoms(g);
  return is_intrinsic(g, atoms, ev);
}

/// A conditioned (simple) CEG together with where its pieces came from.
struct SubCeg {
  Ceg ceg;
  std::vector<PositionId> position_origin;  // sub position -> parent position
  std::vector<std::size_t> edge_origin;     // sub edge -> parent edge

  std::optional<PositionId> position_in_sub(PositionId parent) const {
    for (PositionId w = 0; w < position_origin.size(); ++w)
      if (position_origin[w] == parent) return w;
    return std::nullopt;
  }
  std::optional<std::size_t> edge_in_sub(std::size_t parent_edge) const {
    for (std::size_t e = 0; e < edge_origin.size(); ++e)
      if (edge_origin[e] == parent_edge) return e;
    return std::nullopt;
  }
};

/// Restricts the CEG to an intrinsic event. Each retained edge gets
///   p(ev | through e) / p(ev | through source(e)) * p(e),
/// with both conditionals summed exactly over atoms. Retained positions keep
/// their relative id order; the result carries no stage structure.
inline SubCeg condition(const Ceg& g, std::span<const Atom> atoms, const Event& ev) {
  auto sub = event_subgraph(g, atoms, ev);
  if (sub.path_count != sub.atom_count)
    throw Error(ErrorCode::NotIntrinsic, "the event subgraph has " + sub.path_count.str() + " paths but the event has " +
                                             std::to_string(sub.atom_count) + " atoms");

  const auto np = g.position_count();
  const auto ne = g.edges().size();
  std::vector<Rat> all_pos(np, Rat(0)), ev_pos(np, Rat(0)), all_edge(ne, Rat(0)), ev_edge(ne, Rat(0));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Rat p = atom_probability(g, atoms[i]);
    bool in = ev.contains(i);
    all_pos[g.root()] += p;
    if (in) ev_pos[g.root()] += p;
    for (auto e : atoms[i].edges) {
      all_edge[e] += p;
      all_pos[g.edge(e).target] += p;
      if (in) {
        ev_edge[e] += p;
        ev_pos[g.edge(e).target] += p;
      }
    }
  }

  SubCeg out;
  std::vector<PositionId> new_id(np, static_cast<PositionId>(-1));
  for (PositionId w = 0; w < np; ++w)
    if (sub.position_kept[w]) {
      new_id[w] = static_cast<PositionId>(out.position_origin.size());
      out.position_origin.push_back(w);
    }
  std::vector<CegEdge> edges;
  for (std::size_t e = 0; e < ne; ++e) {
    if (!sub.edge_kept[e]) continue;
    const auto& ce = g.edge(e);
    Rat given_edge = ev_edge[e] / all_edge[e];
    Rat given_source = ev_pos[ce.source] / all_pos[ce.source];
    edges.push_back({new_id[ce.source], new_id[ce.target], ce.label, given_edge / given_source * ce.prob});
    out.edge_origin.push_back(e);
  }
  // Ceg::build keeps edge order, so edge indices line up with edge_origin.
  out.ceg = Ceg::build(out.position_origin.size(), new_id[g.sink()], std::move(edges));
  return out;
}

inline SubCeg condition(const Ceg& g, const Event& ev) {
  auto atoms = enumerate_atoms(g);
  return condition(g, atoms, ev);
}

/// p(atom | ev) read off the conditioned graph. The atom is given in the
/// parent's edge indices.
inline Rat conditioned_atom_probability(const SubCeg& sub, const Atom& parent_atom) {
  Rat p = 1;
  for (auto e : parent_atom.edges) {
    auto se = sub.edge_in_sub(e);
    if (!se) throw Error(ErrorCode::AtomNotRetained, "edge " + std::to_string(e) + " is not in the conditioned graph");
    p *= sub.ceg.edge(*se).prob;
  }
  return p;
}

/// Maps a conditioned-graph atom back to the parent's edge indices.
inline Atom parent_atom(const SubCeg& sub, const Atom& a) {
  Atom out;
  for (auto e : a.edges) out.edges.push_back(sub.edge_origin[e]);
  return out;
}

}  // namespace ceg
