// Acceptance run: one PASS/FAIL line per criterion, with wall time.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "ceg/conditioning.hpp"
#include "ceg/io.hpp"
#include "ceg/oracle.hpp"
#include "ceg/random.hpp"
#include "ceg/separation.hpp"
#include "ceg/verify.hpp"

using namespace ceg;
using Clock = std::chrono::steady_clock;

namespace {

std::string fixture(const std::string& name) { return std::string(CEG_FIXTURE_DIR) + "/" + name; }

Rat R(long n, long d = 1) { return Rat(n) / Rat(d); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Shared between criteria 5 and 9.
struct SuiteFive {
  bool ran = false;
  bool complete = false;
  double seconds = 0;
  EquivalenceStats stats;
  std::string coverage;
} suite5;

Outcome criterion1() {
  auto g = compile(load_tree(fixture("example1_tree.json")));
  std::size_t nonsink = g.position_count() - 1;
  auto w1 = walk(g, {"male"}), w2 = walk(g, {"female"});
  auto w3 = walk(g, {"male", "S before puberty"}), w4 = walk(g, {"female", "S after puberty"});
  bool ok = nonsink == 10 && w1 && w2 && w3 && w4;
  ok = ok && walk(g, {"male", "S after puberty"}) == w3 && walk(g, {"female", "S before puberty"}) == w3;
  auto stages = coloured_stages(g);
  std::vector<PositionId> a{std::min(*w1, *w2), std::max(*w1, *w2)}, b{std::min(*w3, *w4), std::max(*w3, *w4)};
  ok = ok && stages.size() == 2 && std::count(stages.begin(), stages.end(), a) == 1 &&
       std::count(stages.begin(), stages.end(), b) == 1;
  std::ostringstream s;
  s << nonsink << " non-sink positions, " << stages.size() << " coloured stages";
  return {ok, s.str()};
}

// Probability on the edge from -> to with the given label in a conditioned
// graph, addressed by parent ids.
std::optional<Rat> sub_edge(const SubCeg& sub, PositionId from, PositionId to, const std::string& label) {
  auto s = sub.position_in_sub(from), t = sub.position_in_sub(to);
  if (!s || !t) return std::nullopt;
  for (auto e : sub.ceg.out_edges(*s))
    if (sub.ceg.edge(e).target == *t && sub.ceg.edge(e).label == label) return sub.ceg.edge(e).prob;
  return std::nullopt;
}

Outcome criterion2() {
  auto g = compile(load_tree(fixture("example1_tree.json")));
  auto atoms = enumerate_atoms(g);
  auto ev = build_event(g, atoms, load_event(fixture("sec26_event.json")));
  auto p = event_probability(g, atoms, ev);
  auto sub = condition(g, atoms, ev);
  PositionId w0 = 0, w1 = *walk(g, {"male"}), w2 = *walk(g, {"female"}), w3 = *walk(g, {"female", "S before puberty"}),
             w4 = *walk(g, {"female", "S after puberty"}), w5 = *walk(g, {"female", "S never"}),
             w8 = *walk(g, {"female", "S after puberty", "develop C"}),
             w9 = *walk(g, {"female", "S after puberty", "not develop C"});
  std::vector<std::string> bad;
  auto expect = [&](PositionId a, PositionId b, const std::string& label, const Rat& want, const char* name) {
    auto got = sub_edge(sub, a, b, label);
    if (!got || *got != want) bad.push_back(name);
  };
  if (p != R(15, 16)) bad.push_back("p(event)");
  expect(w0, w1, "male", R(8, 15), "w0->w1");
  expect(w0, w2, "female", R(7, 15), "w0->w2");
  expect(w2, w3, "S before puberty", R(2, 7), "w2->w3");
  expect(w2, w4, "S after puberty", R(1, 7), "w2->w4");
  expect(w2, w5, "S never", R(4, 7), "w2->w5");
  expect(w4, w8, "develop C", R(1), "w4->w8");
  if (sub.position_in_sub(w9) || sub_edge(sub, w4, w9, "not develop C")) bad.push_back("w4->w9 present");
  std::size_t unchanged = 0;
  for (std::size_t se = 0; se < sub.ceg.edges().size(); ++se) {
    const auto& e = g.edge(sub.edge_origin[se]);
    if (e.source == w0 || e.source == w2 || e.source == w4) continue;
    if (sub.ceg.edge(se).prob != e.prob) bad.push_back("edge " + std::to_string(sub.edge_origin[se]) + " changed");
    ++unchanged;
  }
  for (auto id : ev.atoms)
    if (conditioned_atom_probability(sub, atoms[id]) != atom_probability(g, atoms[id]) * R(16, 15))
      bad.push_back("atom " + std::to_string(id));
  std::ostringstream s;
  s << "p = " << to_string(p) << ", " << unchanged << " other edges unchanged, " << ev.size() << " atoms scaled by 16/15";
  for (const auto& b : bad) s << "; mismatch " << b;
  return {bad.empty(), s.str()};
}

Outcome criterion3() {
  auto g = compile(load_tree(fixture("example1_tree.json")));
  auto atoms = enumerate_atoms(g);
  auto ev = build_event(g, atoms, load_event(fixture("sec26_nonintrinsic.json")));
  auto r = intrinsic_report(g, atoms, ev);
  std::ostringstream s;
  s << "paths=" << r.paths << " atoms=" << r.atoms << " intrinsic=" << (r.intrinsic() ? "true" : "false");
  return {r.paths == 4 && r.atoms == 2 && !r.intrinsic(), s.str()};
}

Outcome criterion4() {
  std::mt19937_64 rng(401);
  RandomCegOptions simple;
  simple.max_positions = 11;
  std::size_t failures = 0, checked_atoms = 0;
  for (int i = 0; i < 200; ++i) {
    auto g = i % 2 ? random_sceg(rng, simple) : random_compiled_ceg(rng, 12);
    auto atoms = enumerate_atoms(g);
    auto ev = build_event(g, atoms, random_intrinsic_expr(g, atoms, rng));
    auto p_ev = event_probability(g, atoms, ev);
    auto sub = condition(g, atoms, ev);
    bool ok = true;
    for (auto id : ev.atoms) {
      ok = ok && conditioned_atom_probability(sub, atoms[id]) == atom_probability(g, atoms[id]) / p_ev;
      ++checked_atoms;
    }
    for (PositionId w = 0; w < sub.ceg.position_count(); ++w) {
      if (w == sub.ceg.sink()) continue;
      Rat sum = 0;
      for (auto e : sub.ceg.out_edges(w)) sum += sub.ceg.edge(e).prob;
      ok = ok && sum == 1;
    }
    failures += !ok;
  }
  std::ostringstream s;
  s << "200 cases, " << checked_atoms << " retained atoms, " << failures << " failures";
  return {failures == 0, s.str()};
}

constexpr double kSuiteFiveSeconds = 300;
constexpr std::size_t kSuiteFiveMaxNonsink = 7;  // 8 positions with the sink

void run_suite5() {
  auto start = Clock::now();
  SuiteBudget budget;
  budget.deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(kSuiteFiveSeconds));
  EquivalenceOptions opt;  // 20 samples, seed 7
  std::size_t random_done = 0;
  suite5.stats = run_random(1000, 15, opt, budget, &random_done);
  std::ostringstream cov;
  cov << "random " << random_done << "/1000";
  bool complete = random_done == 1000;
  std::size_t layers_done = 0;
  if (complete) {
    auto layers = run_exhaustive(kSuiteFiveMaxNonsink, opt, budget, [](const LayerReport& l) {
      std::cerr << "  suite 5: layer " << l.nonsink + 1 << " positions, " << l.stats.instances << " classes"
                << (l.complete ? "" : " (stopped by budget)") << "\n";
    });
    for (const auto& l : layers) {
      suite5.stats.merge(l.stats);
      cov << ", " << l.nonsink + 1 << " positions " << l.stats.instances << (l.complete ? "" : " (partial)");
      layers_done += l.complete;
    }
  }
  complete = complete && layers_done == kSuiteFiveMaxNonsink;
  if (!complete) cov << "; exhaustive coverage stops before " << layers_done + 2 << " positions";
  suite5.complete = complete;
  suite5.coverage = cov.str();
  suite5.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  suite5.ran = true;
}

Outcome criterion5() {
  run_suite5();
  std::ostringstream s;
  s << suite5.stats.pairs << " pairs, " << suite5.stats.disagreements << " disagreements; " << suite5.coverage;
  for (const auto& f : suite5.stats.failures) s << "; " << f;
  return {suite5.complete && suite5.stats.disagreements == 0 && suite5.seconds < kSuiteFiveSeconds, s.str()};
}

Outcome criterion6() {
  std::mt19937_64 rng(601);
  RandomCegOptions simple;
  simple.max_positions = 11;
  std::size_t failures = 0, independent = 0;
  for (int i = 0; i < 500; ++i) {
    auto g = i % 2 ? random_sceg(rng, simple) : random_compiled_ceg(rng, 12);
    auto atoms = enumerate_atoms(g);
    auto ev = build_event(g, atoms, random_intrinsic_expr(g, atoms, rng));
    std::uniform_int_distribution<PositionId> pick(0, g.sink() - 1);
    PositionId a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    auto r = check_lemma1(g, atoms, Variable::at(a), Variable::at(b), ev);
    failures += !r.consistent();
    independent += r.in_parent;
  }
  std::ostringstream s;
  s << "500 triples (" << independent << " conditionally independent), " << failures << " failures";
  return {failures == 0, s.str()};
}

Outcome criterion7() {
  std::mt19937_64 rng(701);
  RandomCegOptions simple;
  simple.max_positions = 11;
  std::size_t failures = 0, positions = 0;
  for (int i = 0; i < 500; ++i) {
    auto g = i % 2 ? random_sceg(rng, simple) : random_compiled_ceg(rng, 12);
    auto atoms = enumerate_atoms(g);
    for (PositionId w = 0; w < g.position_count(); ++w) {
      if (w == g.sink()) continue;
      ++positions;
      failures += !check_lemma2(g, atoms, w);
    }
  }
  std::ostringstream s;
  s << "500 graphs, " << positions << " positions, " << failures << " failures";
  return {failures == 0, s.str()};
}

Rat conditional(const Ceg& g, std::span<const Atom> atoms, const Event& given, const EventExpr& what, const EventExpr& on) {
  auto on_ev = intersect(given, build_event(g, atoms, on));
  auto both = intersect(on_ev, build_event(g, atoms, what));
  return event_probability(g, atoms, both) / event_probability(g, atoms, on_ev);
}

Outcome criterion8() {
  std::vector<std::string> bad;
  auto fig7 = load_ceg(fixture("fig7_sceg.json"));
  auto atoms = enumerate_atoms(fig7);
  auto no_drug = build_event(fig7, atoms, load_event(fixture("ex2_no_drug.json")));
  auto drug = build_event(fig7, atoms, load_event(fixture("ex2_drug_given.json")));
  std::vector<PositionId> symptom{*walk(fig7, {"male"}), *walk(fig7, {"female"})};
  std::vector<PositionId> condition_layer;
  for (PositionId w = 0; w < fig7.position_count(); ++w)
    for (auto e : fig7.out_edges(w))
      if (fig7.edge(e).label == "develop C" && std::find(condition_layer.begin(), condition_layer.end(), w) == condition_layer.end())
        condition_layer.push_back(w);

  auto C = EventExpr::with_label("develop C");
  auto B = EventExpr::with_label("S before puberty"), A = EventExpr::with_label("S after puberty");

  // Drug not given: a cut-vertex between the layers, and both conditionals
  // collapse to p(C developed) under the event.
  auto sub = condition(fig7, atoms, no_drug);
  bool cut_between = false;
  auto sub_cuts = cut_vertices(sub.ceg);
  for (auto w : sub_cuts) {
    bool after_symptom = true, before_condition = false;
    for (auto s : symptom)
      if (auto ss = sub.position_in_sub(s)) after_symptom = after_symptom && precedes(sub.ceg, *ss, w);
    for (auto c : condition_layer)
      if (auto sc = sub.position_in_sub(c)) before_condition = before_condition || *sc == w || precedes(sub.ceg, w, *sc);
    cut_between = cut_between || (after_symptom && before_condition);
  }
  if (!cut_between) bad.push_back("no cut-vertex given no drug");
  if (!conditional_cut_query(fig7, symptom, condition_layer, atoms, no_drug).independent) bad.push_back("csep given no drug");
  auto pc = event_probability(fig7, atoms, intersect(no_drug, build_event(fig7, atoms, C))) / event_probability(fig7, atoms, no_drug);
  if (conditional(fig7, atoms, no_drug, C, B) != pc || conditional(fig7, atoms, no_drug, C, A) != pc)
    bad.push_back("conditionals given no drug differ");
  auto X = Variable::over(symptom), Y = Variable::over(condition_layer);
  if (!generic_independent(fig7, std::span(&X, 1), std::span(&Y, 1), 20, 7, &no_drug)) bad.push_back("oracle given no drug");

  // Drug given: no separating cut-vertex, the two conditionals differ, and
  // the oracle reports dependence.
  auto sub_drug = condition(fig7, atoms, drug);
  if (!cut_vertices(sub_drug.ceg).empty()) bad.push_back("cut-vertex given drug");
  if (conditional_cut_query(fig7, symptom, condition_layer, atoms, drug).independent) bad.push_back("csep given drug");
  if (conditional(fig7, atoms, drug, C, B) == conditional(fig7, atoms, drug, C, A)) bad.push_back("conditionals given drug equal");
  if (generic_independent(fig7, std::span(&X, 1), std::span(&Y, 1), 20, 7, &drug)) bad.push_back("oracle given drug");

  // Second drug: verdicts for no drug / old drug / new drug.
  auto fig10 = load_ceg(fixture("fig10_sceg.json"));
  auto atoms10 = enumerate_atoms(fig10);
  std::vector<PositionId> wa{1, 2}, wb{5, 6, 7, 8};
  std::string verdicts;
  for (const char* name : {"ex3_lambda1.json", "ex3_lambda2.json", "ex3_lambda3.json"}) {
    auto ev = build_event(fig10, atoms10, load_event(fixture(name)));
    verdicts += conditional_cut_query(fig10, wa, wb, atoms10, ev).independent ? 'T' : 'F';
  }
  if (verdicts != "TFT") bad.push_back("second drug verdicts " + verdicts);

  std::ostringstream s;
  s << "cut-vertices given no drug: " << sub_cuts.size() << ", given drug: " << cut_vertices(sub_drug.ceg).size()
    << "; second drug verdicts " << verdicts;
  for (const auto& b : bad) s << "; " << b;
  return {bad.empty(), s.str()};
}

Outcome criterion9() {
  if (!suite5.ran) run_suite5();
  std::ostringstream s;
  s << suite5.stats.lift_instances << " instances with disjoint position cuts, " << suite5.stats.lift_checks
    << " separated cut pairs, " << suite5.stats.lift_failures << " factorization failures";
  if (!suite5.complete) s << "; suite 5 corpus not fully covered (" << suite5.coverage << ")";
  return {suite5.complete && suite5.stats.lift_failures == 0, s.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;  // seconds, 0 for none
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all{
      {1, "Example 1 compilation", 1, criterion1},
      {2, "conditioning worked example", 1, criterion2},
      {3, "non-intrinsic union", 1, criterion3},
      {4, "conditioned probabilities property suite", 30, criterion4},
      {5, "separation equivalence suite", kSuiteFiveSeconds, criterion5},
      {6, "conditional independence transfer suite", 60, criterion6},
      {7, "position-variable independence suite", 60, criterion7},
      {8, "drug study reproduction", 10, criterion8},
      {9, "cut-variable lift", 0, criterion9},
  };
  int failed = 0;
  for (const auto& c : all) {
    auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    // Suite 5's cost is charged to criterion 5 even when 9 reuses it.
    bool in_time = c.limit == 0 || secs < c.limit;
    bool pass = o.pass && in_time;
    if (!in_time) o.detail += "; over the time limit";
    failed += !pass;
    std::printf("criterion %d %s: %s (%.2fs) %s\n", c.id, pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
