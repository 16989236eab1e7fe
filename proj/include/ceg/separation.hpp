#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ceg/ceg.hpp"
#include "ceg/conditioning.hpp"

namespace ceg {

inline void require_position(const Ceg& g, PositionId w) {
  if (!g.contains(w)) throw Error(ErrorCode::UnknownPosition, "position " + std::to_string(w) + " does not exist");
}

/// True when a directed path of length >= 1 leads from a to b.
inline bool precedes(const Ceg& g, PositionId a, PositionId b) {
  require_position(g, a);
  require_position(g, b);
  std::vector<bool> seen(g.position_count(), false);
  std::vector<PositionId> stack{a};
  while (!stack.empty()) {
    auto w = stack.back();
    stack.pop_back();
    for (auto e : g.out_edges(w)) {
      auto t = g.edge(e).target;
      if (t == b) return true;
      if (!seen[t]) {
        seen[t] = true;
        stack.push_back(t);
      }
    }
  }
  return false;
}

/// Upstream / downstream sets of a position and their complements over all
/// positions (sink included). Each list is sorted.
struct ReachSets {
  std::vector<PositionId> up, down, not_up, not_down;
};

inline ReachSets reach_sets(const Ceg& g, PositionId w) {
  require_position(g, w);
  auto reach = reachability(g);
  ReachSets r;
  for (PositionId v = 0; v < g.position_count(); ++v) {
    (reach[v][w] ? r.up : r.not_up).push_back(v);
    (reach[w][v] ? r.down : r.not_down).push_back(v);
  }
  return r;
}

/// Positions other than root and sink that lie on every atom, in
/// topological order.
inline std::vector<PositionId> cut_vertices(const Ceg& g) {
  auto up = paths_from_root(g);
  auto down = paths_to_sink(g);
  const auto& total = down[g.root()];
  std::vector<PositionId> out;
  for (auto w : g.topological_order())
    if (w != g.root() && w != g.sink() && up[w] * down[w] == total) out.push_back(w);
  return out;
}

enum class SeparationReason { W2IsCut, CutBetween, None };

inline std::string_view to_string(SeparationReason r) {
  switch (r) {
    case SeparationReason::W2IsCut: return "W2_IS_CUT";
    case SeparationReason::CutBetween: return "CUT_BETWEEN";
    case SeparationReason::None: return "NONE";
  }
  return "NONE";
}

struct SeparationVerdict {
  bool independent = false;
  std::optional<PositionId> witness;
  SeparationReason reason = SeparationReason::None;
  /// The query after normalization: first never comes after second.
  PositionId first = 0, second = 0;
};

namespace detail {

struct SeparationContext {
  std::vector<std::vector<bool>> reach;
  std::vector<PositionId> cuts;

  explicit SeparationContext(const Ceg& g) : reach(reachability(g)), cuts(cut_vertices(g)) {}

  bool is_cut(PositionId w) const { return std::find(cuts.begin(), cuts.end(), w) != cuts.end(); }

  // X(a) vs X(b) with b not preceding a.
  SeparationVerdict oriented(PositionId a, PositionId b) const {
    SeparationVerdict v;
    v.first = a;
    v.second = b;
    if (is_cut(b)) {
      v.independent = true;
      v.witness = b;
      v.reason = SeparationReason::W2IsCut;
      return v;
    }
    for (auto w : cuts)
      if (reach[a][w] && reach[w][b]) {
        v.independent = true;
        v.witness = w;
        v.reason = SeparationReason::CutBetween;
        return v;
      }
    return v;
  }

  SeparationVerdict query(PositionId w1, PositionId w2) const {
    if (reach[w2][w1]) return oriented(w2, w1);
    if (reach[w1][w2]) return oriented(w1, w2);
    auto v = oriented(w1, w2);
    if (v.independent) return v;
    return oriented(w2, w1);
  }
};

}  // namespace detail

inline void check_query_position(const Ceg& g, PositionId w) {
  require_position(g, w);
  if (w == g.sink()) throw Error(ErrorCode::SinkNotAllowed, "the sink carries no variable");
}

/// Structural test of X(w1) independent of X(w2): independent exactly when
/// the later position is a cut-vertex or a cut-vertex sits strictly between
/// them. The pair is reordered so the later position comes second.
inline SeparationVerdict separation_query(const Ceg& g, PositionId w1, PositionId w2) {
  check_query_position(g, w1);
  check_query_position(g, w2);
  if (w1 == w2) throw Error(ErrorCode::InvalidArgument, "a position variable is never independent of itself");
  return detail::SeparationContext(g).query(w1, w2);
}

/// Every atom meets exactly one member, and neither root nor sink is a member.
inline bool is_position_cut(const Ceg& g, std::span<const PositionId> W) {
  for (auto w : W) require_position(g, w);
  for (auto w : W)
    if (w == g.root() || w == g.sink()) return false;
  return partitions_atoms(g, W);
}

namespace detail {

// Cut-variable arguments may also be sets that some atoms miss (the variable
// is then 0 on those atoms), as long as no atom meets two members. The root
// alone is accepted and stands for X(w0).
inline std::vector<PositionId> check_cut_argument(const Ceg& g, std::span<const PositionId> W, const char* name,
                                                  const std::vector<std::vector<bool>>& reach) {
  std::vector<PositionId> members(W.begin(), W.end());
  for (auto w : members) check_query_position(g, w);
  std::sort(members.begin(), members.end());
  if (members.empty() || std::adjacent_find(members.begin(), members.end()) != members.end())
    throw Error(ErrorCode::NotAPositionCut, std::string(name) + " must be a nonempty set of distinct positions");
  for (auto a : members)
    for (auto b : members)
      if (reach[a][b])
        throw Error(ErrorCode::NotAPositionCut, std::string(name) + " has members " + std::to_string(a) + " and " +
                                                    std::to_string(b) + " on a common atom");
  return members;
}

}  // namespace detail

struct CutVerdict {
  bool independent = false;
  /// Cut-vertex that separates the two sets, when one exists.
  std::optional<PositionId> witness;
};

namespace detail {

// Some cut-vertex w has every member of A strictly before it and every
// member of B at or after it. Checked in both orientations.
inline CutVerdict cut_between_sets(const SeparationContext& ctx, std::span<const PositionId> A,
                                   std::span<const PositionId> B) {
  auto one_way = [&](std::span<const PositionId> first, std::span<const PositionId> second) -> std::optional<PositionId> {
    for (auto w : ctx.cuts) {
      bool ok = true;
      for (auto a : first) ok = ok && ctx.reach[a][w];
      for (auto b : second) ok = ok && (b == w || ctx.reach[w][b]);
      if (ok) return w;
    }
    return std::nullopt;
  };
  if (auto w = one_way(A, B)) return {true, w};
  if (auto w = one_way(B, A)) return {true, w};
  return {};
}

}  // namespace detail

/// Sufficient structural condition for X(Wa) independent of X(Wb): some
/// pair across the sets is separated. false means no structural witness,
/// not proven dependence.
inline CutVerdict cut_variable_query(const Ceg& g, std::span<const PositionId> Wa, std::span<const PositionId> Wb) {
  detail::SeparationContext ctx(g);
  auto A = detail::check_cut_argument(g, Wa, "Wa", ctx.reach);
  auto B = detail::check_cut_argument(g, Wb, "Wb", ctx.reach);
  for (auto a : A)
    for (auto b : B) {
      if (a == b) continue;
      auto v = ctx.query(a, b);
      if (v.independent) return {true, v.witness};
    }
  return {};
}

/// Same question given an intrinsic event: looks for a cut-vertex of the
/// conditioned graph between the retained members of Wa and Wb. Witness ids
/// refer to the parent graph. A side with no retained member is constant
/// under the event, hence independent.
inline CutVerdict conditional_cut_query(const Ceg& g, std::span<const PositionId> Wa, std::span<const PositionId> Wb,
                                        std::span<const Atom> atoms, const Event& ev) {
  auto reach = reachability(g);
  auto A = detail::check_cut_argument(g, Wa, "Wa", reach);
  auto B = detail::check_cut_argument(g, Wb, "Wb", reach);
  auto sub = condition(g, atoms, ev);
  auto retained = [&](const std::vector<PositionId>& W) {
    std::vector<PositionId> out;
    for (auto w : W)
      if (auto s = sub.position_in_sub(w)) out.push_back(*s);
    return out;
  };
  auto sa = retained(A), sb = retained(B);
  if (sa.empty() || sb.empty()) return {true, std::nullopt};
  detail::SeparationContext ctx(sub.ceg);
  auto v = detail::cut_between_sets(ctx, sa, sb);
  if (v.witness) v.witness = sub.position_origin[*v.witness];
  return v;
}

inline CutVerdict conditional_cut_query(const Ceg& g, std::span<const PositionId> Wa, std::span<const PositionId> Wb,
                                        const Event& ev) {
  auto atoms = enumerate_atoms(g);
  return conditional_cut_query(g, Wa, Wb, atoms, ev);
}

}  // namespace ceg
