#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ceg/corpus.hpp"
#include "ceg/oracle.hpp"
#include "ceg/random.hpp"
#include "ceg/separation.hpp"

// Structural separation answers cross-checked against the brute-force
// oracle on whole families of graphs.

namespace ceg {

struct EquivalenceStats {
  std::size_t instances = 0;
  std::size_t pairs = 0;
  std::size_t independent_pairs = 0;
  std::size_t disagreements = 0;
  // Cut-variable lift: separated pairs of disjoint position cuts whose
  // joint table must factorize.
  std::size_t lift_instances = 0;
  std::size_t lift_checks = 0;
  std::size_t lift_failures = 0;
  std::vector<std::string> failures;  // first few, for the report

  void merge(const EquivalenceStats& o) {
    instances += o.instances;
    pairs += o.pairs;
    independent_pairs += o.independent_pairs;
    disagreements += o.disagreements;
    lift_instances += o.lift_instances;
    lift_checks += o.lift_checks;
    lift_failures += o.lift_failures;
    for (const auto& f : o.failures)
      if (failures.size() < 10) failures.push_back(f);
  }
};

struct EquivalenceOptions {
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = kDefaultSeed;
  bool lift = true;
  /// Position cuts are searched over all subsets; skip the lift check on
  /// graphs with more interior positions than this.
  std::size_t lift_max_interior = 12;
};

namespace detail {

inline std::string describe(const Ceg& g) {
  std::ostringstream s;
  s << g.position_count() << " positions:";
  for (const auto& e : g.edges()) s << ' ' << e.source << "->" << e.target;
  return s.str();
}

inline void note_failure(EquivalenceStats& st, const std::string& what) {
  if (st.failures.size() < 10) st.failures.push_back(what);
}

// All position cuts (root and sink excluded) of a small graph.
inline std::vector<std::vector<PositionId>> position_cuts(const Ceg& g, const std::vector<std::vector<bool>>& reach) {
  std::vector<PositionId> interior;
  for (PositionId w = 0; w < g.position_count(); ++w)
    if (w != g.root() && w != g.sink()) interior.push_back(w);
  auto up = paths_from_root(g);
  auto down = paths_to_sink(g);
  const auto& total = down[g.root()];
  std::vector<std::vector<PositionId>> cuts;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << interior.size()); ++mask) {
    std::vector<PositionId> W;
    BigCount through = 0;
    bool antichain = true;
    for (std::size_t i = 0; i < interior.size() && antichain; ++i) {
      if (!(mask >> i & 1)) continue;
      for (auto v : W) antichain = antichain && !reach[v][interior[i]] && !reach[interior[i]][v];
      W.push_back(interior[i]);
      through += up[interior[i]] * down[interior[i]];
    }
    if (antichain && through == total) cuts.push_back(std::move(W));
  }
  return cuts;
}

}  // namespace detail

/// Every unordered pair of distinct non-sink positions: structural verdict
/// against the generic oracle. Optionally the cut-variable lift check.
inline EquivalenceStats check_instance(const Ceg& g, const EquivalenceOptions& opt = {}) {
  EquivalenceStats st;
  st.instances = 1;
  InstanceOracle oracle(g);
  detail::SeparationContext ctx(g);

  std::vector<PositionId> vars;
  for (PositionId w = 0; w < g.position_count(); ++w)
    if (w != g.sink()) vars.push_back(w);
  std::vector<Coding> codes;
  for (auto w : vars) codes.push_back(oracle.code(Variable::at(w)));
  std::vector<InstanceOracle::Pair> pairs;
  std::vector<std::pair<PositionId, PositionId>> ids;
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = i + 1; j < vars.size(); ++j) {
      pairs.push_back({&codes[i], &codes[j]});
      ids.emplace_back(vars[i], vars[j]);
    }
  auto generic = oracle.generic(pairs, opt.samples, opt.seed);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto v = ctx.query(ids[k].first, ids[k].second);
    ++st.pairs;
    st.independent_pairs += v.independent;
    if (v.independent != generic[k]) {
      ++st.disagreements;
      detail::note_failure(st, "X(" + std::to_string(ids[k].first) + ") vs X(" + std::to_string(ids[k].second) +
                                   "): structure says " + (v.independent ? "independent" : "dependent") +
                                   ", oracle says " + (generic[k] ? "independent" : "dependent") + " on " +
                                   detail::describe(g));
    }
  }

  if (!opt.lift || g.position_count() - 2 > opt.lift_max_interior) return st;
  auto cuts = detail::position_cuts(g, ctx.reach);
  std::vector<Coding> cut_codes;
  for (const auto& W : cuts) cut_codes.push_back(oracle.code(Variable::over(W)));
  std::vector<InstanceOracle::Pair> lift_pairs;
  bool disjoint_pair_exists = false;
  for (std::size_t a = 0; a < cuts.size(); ++a)
    for (std::size_t b = a + 1; b < cuts.size(); ++b) {
      bool disjoint = true;
      for (auto x : cuts[a])
        for (auto y : cuts[b]) disjoint = disjoint && x != y;
      if (!disjoint) continue;
      disjoint_pair_exists = true;
      if (detail::cut_between_sets(ctx, cuts[a], cuts[b]).independent) lift_pairs.push_back({&cut_codes[a], &cut_codes[b]});
    }
  if (!disjoint_pair_exists) return st;
  ++st.lift_instances;
  auto lifted = oracle.generic(lift_pairs, opt.samples, opt.seed);
  for (std::size_t k = 0; k < lift_pairs.size(); ++k) {
    ++st.lift_checks;
    if (!lifted[k]) {
      ++st.lift_failures;
      detail::note_failure(st, "cut-variable lift failed on " + detail::describe(g));
    }
  }
  return st;
}

struct SuiteBudget {
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  bool expired() const { return std::chrono::steady_clock::now() >= deadline; }
};

struct LayerReport {
  std::size_t nonsink = 0;
  bool complete = false;
  EquivalenceStats stats;
};

/// Exhaustive layers 1..max_nonsink in ascending size, until the budget runs
/// out. Each instance gets its own seeded stored parameterization.
inline std::vector<LayerReport> run_exhaustive(std::size_t max_nonsink, const EquivalenceOptions& opt,
                                               const SuiteBudget& budget,
                                               const std::function<void(const LayerReport&)>& progress = {}) {
  std::vector<LayerReport> out;
  for (std::size_t k = 1; k <= max_nonsink; ++k) {
    LayerReport layer;
    layer.nonsink = k;
    std::size_t index = 0;
    layer.complete = enumerate_topologies(k, [&](const Topology& t) {
      if (budget.expired()) return false;
      std::mt19937_64 rng(opt.seed * 1000003 + k * 7919 + index++);
      layer.stats.merge(check_instance(topology_to_ceg(t, rng), opt));
      return true;
    });
    out.push_back(layer);
    if (progress) progress(layer);
    if (!layer.complete) break;
  }
  return out;
}

/// Random simple CEGs with up to max_positions positions (sink included).
inline EquivalenceStats run_random(std::size_t count, std::size_t max_positions, const EquivalenceOptions& opt,
                                   const SuiteBudget& budget, std::size_t* done = nullptr) {
  EquivalenceStats st;
  std::mt19937_64 rng(opt.seed);
  RandomCegOptions gen;
  gen.min_positions = 2;
  gen.max_positions = max_positions - 1;
  std::size_t i = 0;
  for (; i < count && !budget.expired(); ++i) st.merge(check_instance(random_sceg(rng, gen), opt));
  if (done) *done = i;
  return st;
}

}  // namespace ceg
