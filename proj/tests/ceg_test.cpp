#include <gtest/gtest.h>

#include <map>
#include <random>

#include "ceg/ceg.hpp"
#include "ceg/random.hpp"
#include "support.hpp"

using namespace ceg;
using ceg::test::R;

namespace {

ErrorCode build_error(std::size_t n, PositionId sink, std::vector<CegEdge> edges, PositionClasses stages = {}) {
  try {
    Ceg::build(n, sink, std::move(edges), stages);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::InvalidArgument;
}

// Label-sequence distribution of the paths below a tree vertex.
std::map<std::vector<std::string>, Rat> tree_suffixes(const EventTree& t, VertexId v) {
  std::map<std::vector<std::string>, Rat> out;
  std::vector<std::string> labels;
  auto rec = [&](auto&& self, VertexId u, Rat p) -> void {
    if (t.is_leaf(u)) {
      out[labels] += p;
      return;
    }
    for (auto e : t.out_edges(u)) {
      labels.push_back(t.edge(e).label);
      self(self, t.edge(e).target, p * t.edge(e).prob);
      labels.pop_back();
    }
  };
  rec(rec, v, Rat(1));
  return out;
}

std::map<std::vector<std::string>, Rat> ceg_suffixes(const Ceg& g, PositionId w) {
  std::map<std::vector<std::string>, Rat> out;
  std::vector<std::string> labels;
  auto rec = [&](auto&& self, PositionId u, Rat p) -> void {
    if (u == g.sink()) {
      out[labels] += p;
      return;
    }
    for (auto e : g.out_edges(u)) {
      labels.push_back(g.edge(e).label);
      self(self, g.edge(e).target, p * g.edge(e).prob);
      labels.pop_back();
    }
  };
  rec(rec, w, Rat(1));
  return out;
}

std::vector<std::string> labels_to(const EventTree& t, VertexId v) {
  std::vector<std::string> out;
  for (auto pe = t.parent_edge(v); pe; pe = t.parent_edge(t.edge(*pe).source)) out.push_back(t.edge(*pe).label);
  return {out.rbegin(), out.rend()};
}

}  // namespace

TEST(CegBuild, ValidationErrors) {
  EXPECT_EQ(build_error(1, 0, {}), ErrorCode::InvalidStructure);
  EXPECT_EQ(build_error(2, 0, {}), ErrorCode::InvalidStructure);
  EXPECT_EQ(build_error(2, 1, {{0, 3, "a", R(1)}}), ErrorCode::UnknownPosition);
  EXPECT_EQ(build_error(2, 1, {{0, 1, "a", R(0)}}), ErrorCode::NonpositiveProb);
  EXPECT_EQ(build_error(3, 2, {{0, 1, "a", R(1)}, {1, 1, "b", R(1)}, {1, 2, "c", R(1)}}), ErrorCode::CycleDetected);
  EXPECT_EQ(build_error(4, 3, {{0, 1, "a", R(1)}, {1, 2, "a", R(1)}, {2, 1, "a", R(1, 2)}, {2, 3, "b", R(1, 2)}}),
            ErrorCode::CycleDetected);
  EXPECT_EQ(build_error(3, 2, {{0, 2, "a", R(1)}, {1, 2, "a", R(1)}}), ErrorCode::InvalidStructure);
  EXPECT_EQ(build_error(3, 2, {{0, 1, "a", R(1)}}), ErrorCode::InvalidStructure);
  EXPECT_EQ(build_error(2, 1, {{0, 1, "a", R(1, 2)}, {0, 1, "a", R(1, 2)}}), ErrorCode::DuplicateSiblingLabel);
  EXPECT_EQ(build_error(2, 1, {{0, 1, "a", R(1, 2)}, {0, 1, "b", R(1, 3)}}), ErrorCode::ProbSumNotOne);
  // Stage members must share a floret.
  std::vector<CegEdge> two{{0, 1, "a", R(1, 2)}, {0, 1, "b", R(1, 2)}, {1, 2, "a", R(1, 3)}, {1, 2, "b", R(2, 3)}};
  EXPECT_EQ(build_error(3, 2, two, {{0, 1}}), ErrorCode::InvalidStructure);
  EXPECT_EQ(build_error(3, 2, two, {{0, 2}}), ErrorCode::UnknownPosition);
}

TEST(CegBuild, ParallelEdgesAndStages) {
  auto g = Ceg::build(3, 2,
                      {{0, 1, "a", R(1, 3)}, {0, 1, "b", R(2, 3)}, {1, 2, "a", R(1, 3)}, {1, 2, "b", R(2, 3)}},
                      {{0, 1}});
  EXPECT_EQ(g.stages(), (PositionClasses{{0, 1}}));
  EXPECT_EQ(g.colour(0), 1u);
  EXPECT_EQ(g.colour(1), 1u);
  EXPECT_EQ(enumerate_atoms(g).size(), 4u);
  EXPECT_EQ(g.uncoloured().stages(), (PositionClasses{{0}, {1}}));
  EXPECT_EQ(g.topological_order(), (std::vector<PositionId>{0, 1, 2}));
}

TEST(Compile, MedicalExampleMatchesFixture) {
  auto g = compile(test::load_tree_fixture("example1_tree.json"));
  auto fixture = test::load_ceg_fixture("example1_ceg.json");
  EXPECT_EQ(g.position_count(), 11u);
  EXPECT_EQ(g.sink(), 10u);
  EXPECT_EQ(coloured_stages(g), (PositionClasses{{1, 4}, {2, 5}}));
  ASSERT_EQ(g.edges().size(), fixture.edges().size());
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    EXPECT_EQ(g.edge(i).source, fixture.edge(i).source);
    EXPECT_EQ(g.edge(i).target, fixture.edge(i).target);
    EXPECT_EQ(g.edge(i).label, fixture.edge(i).label);
    EXPECT_EQ(g.edge(i).prob, fixture.edge(i).prob);
  }
  // Stage classes by figure name: {male, female} and {male S early, female S after}.
  auto male = *walk(g, {"male"}), female = *walk(g, {"female"});
  EXPECT_EQ(g.stage_of(male), g.stage_of(female));
  auto w3 = *walk(g, {"male", "S before puberty"});
  EXPECT_EQ(*walk(g, {"male", "S after puberty"}), w3);
  EXPECT_EQ(*walk(g, {"female", "S before puberty"}), w3);
  auto w4 = *walk(g, {"female", "S after puberty"});
  EXPECT_EQ(g.stage_of(w3), g.stage_of(w4));
  EXPECT_NE(w3, w4);
  EXPECT_TRUE(is_maximally_coalesced(g));
}

TEST(Compile, ChainCollapsesToOnePathPerPrefix) {
  auto t = EventTree::build(4, {{0, 1, "a", R(1)}, {1, 2, "b", R(1)}, {2, 3, "c", R(1)}});
  auto g = compile(t);
  EXPECT_EQ(g.position_count(), 4u);
  EXPECT_EQ(enumerate_atoms(g).size(), 1u);
}

TEST(Compile, IdenticalSubtreesMerge) {
  // Both children of the root have the same future: one position, two
  // parallel edges into it.
  auto t = EventTree::build(7, {{0, 1, "l", R(1, 2)}, {0, 2, "r", R(1, 2)}, {1, 3, "x", R(1, 4)}, {1, 4, "y", R(3, 4)},
                                {2, 5, "x", R(1, 4)}, {2, 6, "y", R(3, 4)}});
  auto g = compile(t);
  EXPECT_EQ(g.position_count(), 3u);
  EXPECT_EQ(enumerate_atoms(g).size(), 4u);
}

TEST(Compile, PropertiesOnRandomTrees) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    auto t = random_tree(rng);
    auto g = compile(t);
    auto atoms = enumerate_atoms(g);
    ASSERT_EQ(atoms.size(), t.routes().size());
    EXPECT_TRUE(is_maximally_coalesced(g));
    EXPECT_EQ(g.sink() + 1, g.position_count());
    // Root-to-sink distributions over label sequences are preserved.
    EXPECT_EQ(tree_suffixes(t, 0), ceg_suffixes(g, 0));
    // compile . unfold is the identity on compiled graphs.
    auto again = compile(unfold(g));
    ASSERT_EQ(again.edges().size(), g.edges().size());
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
      EXPECT_EQ(again.edge(k).source, g.edge(k).source);
      EXPECT_EQ(again.edge(k).target, g.edge(k).target);
      EXPECT_EQ(again.edge(k).label, g.edge(k).label);
      EXPECT_EQ(again.edge(k).prob, g.edge(k).prob);
    }
    EXPECT_EQ(again.stages(), g.stages());
  }
}

TEST(Compile, MarkovPropertyOnRandomTrees) {
  // A unit's future depends only on the position it reached: every tree
  // vertex has the suffix distribution of its CEG position.
  std::mt19937_64 rng(32);
  for (int i = 0; i < 200; ++i) {
    auto t = random_tree(rng);
    auto g = compile(t);
    for (auto v : t.situations()) {
      auto w = walk(g, labels_to(t, v));
      ASSERT_TRUE(w.has_value());
      EXPECT_EQ(tree_suffixes(t, v), ceg_suffixes(g, *w));
    }
  }
}

TEST(Atoms, MedicalExampleCountAndMass) {
  auto g = test::load_ceg_fixture("example1_ceg.json");
  auto atoms = enumerate_atoms(g);
  EXPECT_EQ(atoms.size(), 20u);
  Rat total = 0;
  for (const auto& a : atoms) total += atom_probability(g, a);
  EXPECT_EQ(total, 1);
  EXPECT_THROW(enumerate_atoms(g, 19), Error);
  EXPECT_EQ(enumerate_atoms(g, 20).size(), 20u);
}

TEST(Atoms, DiamondHasFourAtoms) {
  auto g = Ceg::build(4, 3,
                      {{0, 1, "a", R(1, 2)}, {0, 2, "b", R(1, 2)}, {1, 3, "x", R(1, 2)}, {1, 3, "y", R(1, 2)},
                       {2, 3, "x", R(1, 3)}, {2, 3, "y", R(2, 3)}});
  EXPECT_EQ(enumerate_atoms(g).size(), 4u);
  EXPECT_EQ(paths_from_root(g)[3], 4);
  EXPECT_EQ(paths_to_sink(g)[0], 4);
}

TEST(Events, TransitionAndEdgeProbabilities) {
  auto g = test::load_ceg_fixture("example1_ceg.json");
  PositionId w3 = 5;
  EXPECT_EQ(transition_probability(g, 0, w3), R(3, 8));
  EXPECT_EQ(event_probability(g, build_event(g, EventExpr::through(w3))), R(3, 8));
  EXPECT_EQ(event_probability(g, build_event(g, EventExpr::edge(5, 7, "develop C"))), R(3, 16));
  EXPECT_EQ(event_probability(g, build_event(g, EventExpr::through(5, 7))), R(3, 16));
  EXPECT_EQ(transition_probability(g, 5, 10), 1);
  EXPECT_EQ(transition_probability(g, 6, 5), 0);
  EXPECT_EQ(event_probability(g, build_event(g, EventExpr::with_label("die before 50"))),
            R(1, 2) * (R(1, 8) * R(2, 5) + R(1, 8) * R(1, 4) + R(1, 2) * R(1, 5) + R(1, 8) * R(1, 3) + R(1, 8) * R(1, 6)) +
                R(1, 2) * (R(1, 2) * R(1, 5) + R(1, 4) * R(1, 3) + R(1, 4) * R(1, 6)));
  try {
    build_event(g, EventExpr::edge(5, 7, "no such label"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownEdge);
  }
}

TEST(Events, BooleanAlgebra) {
  auto g = test::load_ceg_fixture("example1_ceg.json");
  auto atoms = enumerate_atoms(g);
  auto a = build_event(g, atoms, EventExpr::through(5));
  auto b = build_event(g, atoms, EventExpr::with_label("male"));
  auto u = build_event(g, atoms, EventExpr::union_of({EventExpr::through(5), EventExpr::with_label("male")}));
  auto i = build_event(g, atoms, EventExpr::intersection_of({EventExpr::through(5), EventExpr::with_label("male")}));
  auto c = build_event(g, atoms, EventExpr::complement(EventExpr::through(5)));
  EXPECT_EQ(i, intersect(a, b));
  EXPECT_EQ(u.size() + i.size(), a.size() + b.size());
  EXPECT_EQ(c.size() + a.size(), atoms.size());
  EXPECT_EQ(event_probability(g, atoms, c) + event_probability(g, atoms, a), 1);
  EXPECT_EQ(build_event(g, atoms, EventExpr::atoms({3, 1, 3})), (Event{{1, 3}}));
  EXPECT_THROW(build_event(g, atoms, EventExpr::atoms({20})), Error);
}

TEST(Events, SubpathMatchesConsecutiveEdges) {
  auto g = test::load_ceg_fixture("example1_ceg.json");
  auto atoms = enumerate_atoms(g);
  auto ev = build_event(g, atoms, EventExpr::subpath({{4, 5, "S before puberty"}, {5, 7, "develop C"}}));
  EXPECT_EQ(ev.size(), 2u);
  EXPECT_EQ(event_probability(g, atoms, ev), R(1, 2) * R(1, 4) * R(1, 2));
  EXPECT_THROW(build_event(g, atoms, EventExpr::subpath({{4, 5, "S before puberty"}, {7, 10, "die after 50"}})), Error);
}

TEST(Reachability, MedicalExample) {
  auto g = test::load_ceg_fixture("example1_ceg.json");
  auto reach = reachability(g);
  EXPECT_TRUE(reach[0][10]);
  EXPECT_TRUE(reach[4][7]);
  EXPECT_FALSE(reach[4][2]);
  EXPECT_FALSE(reach[5][5]);
  EXPECT_TRUE(partitions_atoms(g, std::vector<PositionId>{1, 4}));
  EXPECT_TRUE(partitions_atoms(g, std::vector<PositionId>{2, 5, 6}));
  EXPECT_FALSE(partitions_atoms(g, std::vector<PositionId>{2, 5}));
  EXPECT_FALSE(partitions_atoms(g, std::vector<PositionId>{1, 2, 4}));
}

TEST(Curtail, TreatmentExampleMatchesReducedFixture) {
  auto g = test::load_ceg_fixture("fig5_ceg.json");
  std::vector<PositionId> frontier{6, 8, 10, 12, 13, 14, 15};
  auto c = curtail(g, frontier);
  auto expected = test::load_ceg_fixture("fig6_ceg.json");
  EXPECT_EQ(c.position_count(), 9u);
  ASSERT_EQ(c.edges().size(), expected.edges().size());
  for (std::size_t i = 0; i < c.edges().size(); ++i) {
    EXPECT_EQ(c.edge(i).source, expected.edge(i).source);
    EXPECT_EQ(c.edge(i).target, expected.edge(i).target);
    EXPECT_EQ(c.edge(i).label, expected.edge(i).label);
    EXPECT_EQ(c.edge(i).prob, expected.edge(i).prob);
  }
  EXPECT_EQ(c.stages(), expected.stages());
  // Upstream label prefixes keep their probabilities.
  for (const auto& a : enumerate_atoms(c)) {
    std::vector<std::string> labels;
    for (auto e : a.edges) labels.push_back(c.edge(e).label);
    PositionId at = g.root();
    Rat p = 1;
    for (const auto& l : labels)
      for (auto e : g.out_edges(at))
        if (g.edge(e).label == l) {
          p *= g.edge(e).prob;
          at = g.edge(e).target;
          break;
        }
    EXPECT_TRUE(std::count(frontier.begin(), frontier.end(), at)) << "prefix does not end on the frontier";
    EXPECT_EQ(p, atom_probability(c, a));
  }
}

TEST(Curtail, FrontierValidation) {
  auto g = test::load_ceg_fixture("example1_ceg.json");
  auto same = curtail(g, std::vector<PositionId>{10});
  EXPECT_EQ(same.edges().size(), g.edges().size());
  for (auto bad : {std::vector<PositionId>{0}, std::vector<PositionId>{2, 5}, std::vector<PositionId>{1, 10}}) {
    try {
      curtail(g, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NotAFrontier);
    }
  }
  auto c = curtail(g, std::vector<PositionId>{1, 4});
  EXPECT_EQ(c.position_count(), 2u);
  EXPECT_EQ(enumerate_atoms(c).size(), 2u);
}
