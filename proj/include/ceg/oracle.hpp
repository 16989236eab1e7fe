#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ceg/ceg.hpp"
#include "ceg/conditioning.hpp"
#include "ceg/separation.hpp"

// Brute-force checks that never look at cut-vertices: every answer comes
// from summing atom probabilities.

namespace ceg {

/// X(W): the label of the edge an atom takes out of the member of W it
/// visits, or "" when it visits none. A single member gives X(w).
struct Variable {
  std::vector<PositionId> members;

  static Variable at(PositionId w) { return {{w}}; }
  static Variable over(std::vector<PositionId> W) { return {std::move(W)}; }
};

inline std::string variable_value(const Ceg& g, const Atom& a, const Variable& x) {
  for (auto e : a.edges)
    if (std::find(x.members.begin(), x.members.end(), g.edge(e).source) != x.members.end()) return g.edge(e).label;
  return "";
}

/// Value tuple -> probability. Conditional tables are normalised by the
/// probability of the conditioning event.
using JointTable = std::map<std::vector<std::string>, Rat>;

inline JointTable joint(const Ceg& g, std::span<const Atom> atoms, std::span<const Variable> vars,
                        const Event* given = nullptr) {
  JointTable t;
  Rat total = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (given && !given->contains(i)) continue;
    std::vector<std::string> key;
    key.reserve(vars.size());
    for (const auto& v : vars) key.push_back(variable_value(g, atoms[i], v));
    Rat p = atom_probability(g, atoms[i]);
    t[key] += p;
    total += p;
  }
  if (total == 0) throw Error(ErrorCode::EmptyEvent, "conditioning event has probability 0");
  for (auto& [k, p] : t) p /= total;
  return t;
}

inline JointTable joint(const Ceg& g, std::span<const Variable> vars) {
  auto atoms = enumerate_atoms(g);
  return joint(g, atoms, vars);
}

/// Whether the first `split` coordinates are independent of the rest.
inline bool factorizes(const JointTable& t, std::size_t split) {
  std::map<std::vector<std::string>, Rat> left, right;
  for (const auto& [k, p] : t) {
    left[{k.begin(), k.begin() + static_cast<std::ptrdiff_t>(split)}] += p;
    right[{k.begin() + static_cast<std::ptrdiff_t>(split), k.end()}] += p;
  }
  for (const auto& [x, px] : left)
    for (const auto& [y, py] : right) {
      std::vector<std::string> k = x;
      k.insert(k.end(), y.begin(), y.end());
      auto it = t.find(k);
      Rat pxy = it == t.end() ? Rat(0) : it->second;
      if (pxy != px * py) return false;
    }
  return true;
}

/// Exact test of (Xs) independent of (Ys), optionally given an event.
inline bool numeric_independent(const Ceg& g, std::span<const Atom> atoms, std::span<const Variable> Xs,
                                std::span<const Variable> Ys, const Event* given = nullptr) {
  std::vector<Variable> vars(Xs.begin(), Xs.end());
  vars.insert(vars.end(), Ys.begin(), Ys.end());
  return factorizes(joint(g, atoms, vars, given), Xs.size());
}

inline bool numeric_independent(const Ceg& g, const Variable& X, const Variable& Y) {
  auto atoms = enumerate_atoms(g);
  return numeric_independent(g, atoms, std::span(&X, 1), std::span(&Y, 1));
}

// ---------------------------------------------------------------------------
// Random parameterizations

constexpr std::uint32_t kMaxWeight = 97;

/// Integer weight in [1, 97] per edge.
inline std::vector<std::uint32_t> random_weights(const Ceg& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(1, kMaxWeight);
  std::vector<std::uint32_t> w(g.edges().size());
  for (auto& x : w) x = pick(rng);
  return w;
}

/// Same graph with probabilities weight / (sum of sibling weights), no stages.
inline Ceg with_weights(const Ceg& g, std::span<const std::uint32_t> weights) {
  std::vector<std::uint64_t> total(g.position_count(), 0);
  for (std::size_t e = 0; e < weights.size(); ++e) total[g.edge(e).source] += weights[e];
  std::vector<CegEdge> edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    edges[e].prob = Rat(weights[e]) / Rat(total[edges[e].source]);
  return Ceg::build(g.position_count(), g.sink(), std::move(edges));
}

inline Ceg random_parameterization(const Ceg& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto w = random_weights(g, rng);
  return with_weights(g, w);
}

// ---------------------------------------------------------------------------
// Fast exact factorization over one fixed graph
//
// With integer edge weights w_e and position totals W_v, an atom's scaled
// mass N = prod_{e on atom} w_e * prod_{v off atom} W_v equals p * L where
// L = prod_v W_v. A pair factorizes iff N(x,y) * N(all) == N(x) * N(y) for
// every cell, and every quantity stays below L^2.

/// Per-atom value index of a variable group (tuples are numbered densely).
struct Coding {
  std::vector<std::uint32_t> code;
  std::uint32_t size = 0;
};

class InstanceOracle {
 public:
  explicit InstanceOracle(const Ceg& g, std::size_t cap = default_atom_cap()) : g_(&g), atoms_(enumerate_atoms(g, cap)) {}

  const Ceg& graph() const { return *g_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  Coding code(std::span<const Variable> vars) const {
    std::map<std::vector<std::string>, std::uint32_t> ids;
    Coding c;
    c.code.reserve(atoms_.size());
    for (const auto& a : atoms_) {
      std::vector<std::string> key;
      for (const auto& v : vars) key.push_back(variable_value(*g_, a, v));
      c.code.push_back(ids.try_emplace(std::move(key), static_cast<std::uint32_t>(ids.size())).first->second);
    }
    c.size = static_cast<std::uint32_t>(ids.size());
    return c;
  }
  Coding code(const Variable& v) const { return code(std::span(&v, 1)); }

  struct Pair {
    const Coding* x;
    const Coding* y;
  };

  /// For each pair: factorizes under the stored probabilities and under
  /// `samples` random weightings drawn from `seed`. mask, when given,
  /// restricts to an event (conditional independence).
  std::vector<bool> generic(std::span<const Pair> pairs, std::size_t samples, std::uint64_t seed,
                            const std::vector<bool>* mask = nullptr) const {
    std::vector<bool> ok(pairs.size(), true);
    run_stored(pairs, ok, mask);
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
      auto w = random_weights(*g_, rng);
      std::vector<std::uint64_t> weights(w.begin(), w.end());
      run(weights, pairs, ok, mask);
      if (std::none_of(ok.begin(), ok.end(), [](bool b) { return b; })) break;
    }
    return ok;
  }

  /// Factorization under one explicit integer weighting.
  std::vector<bool> under_weights(std::span<const std::uint32_t> w, std::span<const Pair> pairs,
                                  const std::vector<bool>* mask = nullptr) const {
    std::vector<bool> ok(pairs.size(), true);
    std::vector<std::uint64_t> weights(w.begin(), w.end());
    run(weights, pairs, ok, mask);
    return ok;
  }

  std::vector<bool> under_stored(std::span<const Pair> pairs, const std::vector<bool>* mask = nullptr) const {
    std::vector<bool> ok(pairs.size(), true);
    run_stored(pairs, ok, mask);
    return ok;
  }

 private:
  template <class Int, class W>
  std::vector<Int> masses(std::span<const W> weights) const {
    const auto& g = *g_;
    std::vector<Int> total(g.position_count(), Int(0));
    for (std::size_t e = 0; e < weights.size(); ++e) total[g.edge(e).source] += Int(weights[e]);
    Int L = 1;
    for (PositionId v = 0; v < g.position_count(); ++v)
      if (v != g.sink()) L *= total[v];
    std::vector<Int> m(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      Int on = 1, num = 1;
      for (auto e : atoms_[i].edges) {
        num *= Int(weights[e]);
        on *= total[g.edge(e).source];
      }
      m[i] = L / on * num;
    }
    return m;
  }

  template <class Int>
  bool check(const std::vector<Int>& m, const Coding& x, const Coding& y, const std::vector<bool>* mask) const {
    std::vector<Int> nxy(static_cast<std::size_t>(x.size) * y.size, Int(0)), nx(x.size, Int(0)), ny(y.size, Int(0));
    Int all = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (mask && !(*mask)[i]) continue;
      nxy[static_cast<std::size_t>(x.code[i]) * y.size + y.code[i]] += m[i];
      nx[x.code[i]] += m[i];
      ny[y.code[i]] += m[i];
      all += m[i];
    }
    for (std::uint32_t a = 0; a < x.size; ++a) {
      if (nx[a] == 0) continue;
      for (std::uint32_t b = 0; b < y.size; ++b)
        if (nxy[static_cast<std::size_t>(a) * y.size + b] * all != nx[a] * ny[b]) return false;
    }
    return true;
  }

  template <class W>
  void run_typed(std::span<const W> weights, std::size_t bits, std::span<const Pair> pairs, std::vector<bool>& ok,
                 const std::vector<bool>* mask) const {
    auto go = [&]<class Int>(std::type_identity<Int>) {
      auto m = masses<Int>(weights);
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if (ok[k] && !check(m, *pairs[k].x, *pairs[k].y, mask)) ok[k] = false;
    };
    // Cell products stay below L^2; masses below L.
    if (2 * bits + 2 < 127)
      go(std::type_identity<__int128>{});
    else if (2 * bits + 2 < 255)
      go(std::type_identity<boost::multiprecision::int256_t>{});
    else
      go(std::type_identity<BigCount>{});
  }

  void run(std::span<const std::uint64_t> weights, std::span<const Pair> pairs, std::vector<bool>& ok,
           const std::vector<bool>* mask) const {
    std::vector<std::uint64_t> total(g_->position_count(), 0);
    for (std::size_t e = 0; e < weights.size(); ++e) total[g_->edge(e).source] += weights[e];
    std::size_t bits = 0;
    for (PositionId v = 0; v < g_->position_count(); ++v)
      if (v != g_->sink()) bits += static_cast<std::size_t>(std::bit_width(total[v]));
    run_typed<std::uint64_t>(weights, bits, pairs, ok, mask);
  }

  // Stored probabilities become integer weights via the lcm of each
  // position's denominators.
  void run_stored(std::span<const Pair> pairs, std::vector<bool>& ok, const std::vector<bool>* mask) const {
    const auto& g = *g_;
    std::vector<BigCount> lcm(g.position_count(), BigCount(1));
    for (const auto& e : g.edges()) lcm[e.source] = boost::multiprecision::lcm(lcm[e.source], boost::multiprecision::denominator(e.prob));
    std::vector<BigCount> weights;
    weights.reserve(g.edges().size());
    for (const auto& e : g.edges())
      weights.push_back(boost::multiprecision::numerator(e.prob) * (lcm[e.source] / boost::multiprecision::denominator(e.prob)));
    std::size_t bits = 0;
    for (PositionId v = 0; v < g.position_count(); ++v)
      if (v != g.sink()) bits += boost::multiprecision::msb(lcm[v]) + 1;
    auto go = [&]<class Int>(std::type_identity<Int>) {
      std::vector<Int> w;
      w.reserve(weights.size());
      for (const auto& x : weights) w.push_back(static_cast<Int>(x));
      auto m = masses<Int>(std::span<const Int>(w));
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if (ok[k] && !check(m, *pairs[k].x, *pairs[k].y, mask)) ok[k] = false;
    };
    if (2 * bits + 2 < 127)
      go(std::type_identity<__int128>{});
    else if (2 * bits + 2 < 255)
      go(std::type_identity<boost::multiprecision::int256_t>{});
    else
      go(std::type_identity<BigCount>{});
  }

  const Ceg* g_;
  std::vector<Atom> atoms_;
};

constexpr std::size_t kDefaultSamples = 20;
constexpr std::uint64_t kDefaultSeed = 7;

/// Factorization under the stored probabilities and `samples` random ones.
/// A single failure means dependent; agreement everywhere is taken as
/// independence for every compatible distribution.
inline bool generic_independent(const Ceg& g, std::span<const Variable> Xs, std::span<const Variable> Ys,
                                std::size_t samples = kDefaultSamples, std::uint64_t seed = kDefaultSeed,
                                const Event* given = nullptr) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be at least 1");
  InstanceOracle o(g);
  auto x = o.code(Xs), y = o.code(Ys);
  InstanceOracle::Pair p{&x, &y};
  std::vector<bool> mask;
  if (given) {
    mask.assign(o.atoms().size(), false);
    for (auto id : given->atoms) mask.at(id) = true;
  }
  return o.generic(std::span(&p, 1), samples, seed, given ? &mask : nullptr).front();
}

inline bool generic_independent(const Ceg& g, PositionId w1, PositionId w2, std::size_t samples = kDefaultSamples,
                                std::uint64_t seed = kDefaultSeed) {
  check_query_position(g, w1);
  check_query_position(g, w2);
  auto X = Variable::at(w1), Y = Variable::at(w2);
  return generic_independent(g, std::span(&X, 1), std::span(&Y, 1), samples, seed);
}

// ---------------------------------------------------------------------------
// Direct checks of the structural results

struct Lemma1Check {
  bool in_parent = false;  // X, Y independent given the event, computed on the parent
  bool in_sub = false;     // X, Y independent in the conditioned graph
  bool consistent() const { return in_parent == in_sub; }
};

/// Conditional independence in the parent versus plain independence in the
/// conditioned graph. Both sides come from their own atom enumerations.
inline Lemma1Check check_lemma1(const Ceg& g, std::span<const Atom> atoms, const Variable& X, const Variable& Y,
                                const Event& ev) {
  Lemma1Check r;
  r.in_parent = numeric_independent(g, atoms, std::span(&X, 1), std::span(&Y, 1), &ev);
  auto sub = condition(g, atoms, ev);
  auto map_var = [&](const Variable& v) {
    Variable out;
    for (auto w : v.members)
      if (auto s = sub.position_in_sub(w)) out.members.push_back(*s);
    return out;
  };
  auto sx = map_var(X), sy = map_var(Y);
  auto sub_atoms = enumerate_atoms(sub.ceg);
  r.in_sub = numeric_independent(sub.ceg, sub_atoms, std::span(&sx, 1), std::span(&sy, 1));
  return r;
}

/// Given I(w), X(w) is independent of the vector of X(v) over positions
/// not downstream of w (w and the sink left out). Checked for I(w) = 1 and
/// I(w) = 0 separately.
inline bool check_lemma2(const Ceg& g, std::span<const Atom> atoms, PositionId w) {
  check_query_position(g, w);
  auto reach = reachability(g);
  std::vector<Variable> rest;
  for (PositionId v = 0; v < g.position_count(); ++v)
    if (v != w && v != g.sink() && !reach[w][v]) rest.push_back(Variable::at(v));
  std::vector<bool> through(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) through[i] = atom_visits(g, atoms[i], w);
  auto X = Variable::at(w);
  for (bool side : {true, false}) {
    std::vector<bool> mask(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) mask[i] = through[i] == side;
    auto ev = Event::from_mask(mask);
    if (ev.empty()) continue;
    if (!numeric_independent(g, atoms, std::span(&X, 1), rest, &ev)) return false;
  }
  return true;
}

inline bool check_lemma2(const Ceg& g, PositionId w) {
  auto atoms = enumerate_atoms(g);
  return check_lemma2(g, atoms, w);
}

}  // namespace ceg
