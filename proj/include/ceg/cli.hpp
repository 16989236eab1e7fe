#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ceg/ceg.hpp"
#include "ceg/conditioning.hpp"
#include "ceg/io.hpp"
#include "ceg/oracle.hpp"
#include "ceg/separation.hpp"
#include "ceg/verify.hpp"

namespace ceg::cli {

// Exit codes: 0 success or a true verdict, 1 a false verdict, 2 a library
// error, 64 a usage error.
constexpr int kTrue = 0;
constexpr int kFalse = 1;
constexpr int kError = 2;
constexpr int kUsage = 64;

namespace detail {

inline std::vector<PositionId> id_list(const std::string& text) {
  std::vector<PositionId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorCode::InvalidArgument, "'" + item + "' is not a position id");
    out.push_back(static_cast<PositionId>(v));
  }
  return out;
}

inline Json ids_json(const std::vector<PositionId>& ids) { return Json(ids); }

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  f << text;
}

}  // namespace detail

/// Parses argv and runs one subcommand. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chain event graph toolkit"};
  app.require_subcommand(1);
  bool json = false;
  bool snap = false;
  app.add_flag("--json", json, "Machine-readable JSON output");
  app.add_flag("--snap-decimals", snap, "Snap decimal probabilities to the simplest fraction within 1e-9");

  std::string input, event_path, output, frontier, wa, wb, corpus;
  PositionId w1 = 0, w2 = 0;
  std::size_t samples = kDefaultSamples, max_nonsink = 7, random_count = 1000, max_random = 15;
  std::uint64_t seed = kDefaultSeed;
  double budget_seconds = 300;

  auto needs_input = [&](CLI::App* sub, const char* what) {
    sub->add_option("input", input, what)->required()->check(CLI::ExistingFile);
  };
  auto needs_event = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--event", event_path, "Event JSON file")->check(CLI::ExistingFile);
    if (required) o->required();
  };

  auto* validate = app.add_subcommand("validate", "Check a tree, CEG or event file");
  needs_input(validate, "Tree, CEG or event JSON");
  auto* compile_cmd = app.add_subcommand("compile", "Compile an event tree into a CEG");
  needs_input(compile_cmd, "Tree JSON");
  compile_cmd->add_option("-o,--output", output, "Write the CEG here instead of stdout");
  auto* stages_cmd = app.add_subcommand("stages", "Stage classes of a tree's situations");
  needs_input(stages_cmd, "Tree JSON");
  auto* positions_cmd = app.add_subcommand("positions", "Position classes of a tree's situations");
  needs_input(positions_cmd, "Tree JSON");
  auto* atoms_cmd = app.add_subcommand("atoms", "List the atoms of a CEG");
  needs_input(atoms_cmd, "CEG JSON");
  auto* prob_cmd = app.add_subcommand("prob", "Probability of an event");
  needs_input(prob_cmd, "CEG JSON");
  needs_event(prob_cmd, true);
  auto* intrinsic_cmd = app.add_subcommand("intrinsic", "Is an event intrinsic (paths = atoms)?");
  needs_input(intrinsic_cmd, "CEG JSON");
  needs_event(intrinsic_cmd, true);
  auto* condition_cmd = app.add_subcommand("condition", "Condition a CEG on an intrinsic event");
  needs_input(condition_cmd, "CEG JSON");
  needs_event(condition_cmd, true);
  condition_cmd->add_option("-o,--output", output, "Write the conditioned graph here instead of stdout");
  auto* curtail_cmd = app.add_subcommand("curtail", "Cut a CEG at a frontier of positions");
  needs_input(curtail_cmd, "CEG JSON");
  curtail_cmd->add_option("--frontier", frontier, "Comma-separated position ids")->required();
  curtail_cmd->add_option("-o,--output", output, "Write the curtailed CEG here instead of stdout");
  auto* cutverts_cmd = app.add_subcommand("cutverts", "Positions every atom passes through");
  needs_input(cutverts_cmd, "CEG JSON");
  auto* sep_cmd = app.add_subcommand("sep", "Structural independence of X(w1) and X(w2)");
  needs_input(sep_cmd, "CEG JSON");
  sep_cmd->add_option("--w1", w1)->required();
  sep_cmd->add_option("--w2", w2)->required();
  auto* csep_cmd = app.add_subcommand("csep", "Structural independence of two cut-variables, optionally given an event");
  needs_input(csep_cmd, "CEG JSON");
  csep_cmd->add_option("--wa", wa, "Comma-separated position ids")->required();
  csep_cmd->add_option("--wb", wb, "Comma-separated position ids")->required();
  needs_event(csep_cmd, false);
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force independence test over random parameterizations");
  needs_input(oracle_cmd, "CEG JSON");
  oracle_cmd->add_option("--w1", w1)->required();
  oracle_cmd->add_option("--w2", w2)->required();
  oracle_cmd->add_option("--samples", samples, "Random parameterizations (default 20)")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--seed", seed, "Seed for the random parameterizations (default 7)");
  needs_event(oracle_cmd, false);
  auto* verify_cmd = app.add_subcommand("verify-theorems", "Structural answers against the oracle on a corpus");
  verify_cmd->add_option("--corpus", corpus, "Directory of CEG JSON files (default: generated corpus)")
      ->check(CLI::ExistingDirectory);
  verify_cmd->add_option("--max-positions", max_nonsink, "Largest exhaustive layer, in non-sink positions")
      ->check(CLI::Range(1, 8));
  verify_cmd->add_option("--random", random_count, "Number of random instances");
  verify_cmd->add_option("--random-max-positions", max_random, "Positions (sink included) in random instances")
      ->check(CLI::Range(3, 30));
  verify_cmd->add_option("--budget", budget_seconds, "Wall-clock budget in seconds");
  verify_cmd->add_option("--samples", samples, "Random parameterizations (default 20)")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", seed, "Seed for the random parameterizations (default 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsage;
  }

  ParseOptions popt;
  if (snap) popt.snap = DecimalSnap{};

  try {
    if (validate->parsed()) {
      auto doc = ::ceg::detail::parse_json(read_file(input));
      std::string kind;
      std::string summary;
      if (doc.is_object() && doc.contains("sink")) {
        auto g = parse_ceg(read_file(input), popt);
        kind = "ceg";
        summary = std::to_string(g.position_count()) + " positions, " + std::to_string(g.edges().size()) + " edges";
      } else if (doc.is_object() && doc.contains("vertices")) {
        auto t = parse_tree(read_file(input), popt);
        kind = "tree";
        summary = std::to_string(t.vertex_count()) + " vertices, " + std::to_string(t.leaves().size()) + " routes";
      } else {
        parse_event(read_file(input));
        kind = "event";
        summary = "well-formed";
      }
      if (json)
        out << serialize(Json{{"valid", true}, {"kind", kind}, {"summary", summary}});
      else
        out << "valid " << kind << ": " << summary << "\n";
      return kTrue;
    }

    if (compile_cmd->parsed()) {
      auto g = compile(load_tree(input, popt));
      detail::write_output(output, serialize_ceg(g), out);
      if (!output.empty() && output != "-") {
        if (json)
          out << serialize(Json{{"positions", g.position_count() - 1}, {"sink", g.sink()}, {"output", output}});
        else
          out << "compiled: " << g.position_count() - 1 << " non-sink positions, sink " << g.sink() << "\n";
      }
      return kTrue;
    }

    if (stages_cmd->parsed() || positions_cmd->parsed()) {
      auto t = load_tree(input, popt);
      auto classes = stages_cmd->parsed() ? compute_stages(t) : compute_positions(t);
      Json arr = Json::array();
      for (const auto& c : classes) arr.push_back(c);
      out << arr.dump() << "\n";
      return kTrue;
    }

    if (atoms_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto atoms = enumerate_atoms(g);
      if (json) {
        Json arr = Json::array();
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          Json labels = Json::array();
          for (auto e : atoms[i].edges) labels.push_back(g.edge(e).label);
          arr.push_back(Json{{"id", i}, {"labels", labels}, {"prob", to_string(atom_probability(g, atoms[i]))}});
        }
        out << serialize(arr);
      } else {
        for (std::size_t i = 0; i < atoms.size(); ++i)
          out << i << "\t" << to_string(atom_probability(g, atoms[i])) << "\t" << describe_atom(g, atoms[i]) << "\n";
      }
      return kTrue;
    }

    if (prob_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto atoms = enumerate_atoms(g);
      auto ev = build_event(g, atoms, load_event(event_path));
      auto p = event_probability(g, atoms, ev);
      if (json)
        out << serialize(Json{{"probability", to_string(p)}, {"atoms", ev.atoms}});
      else
        out << to_string(p) << "\n";
      return kTrue;
    }

    if (intrinsic_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto atoms = enumerate_atoms(g);
      auto ev = build_event(g, atoms, load_event(event_path));
      auto r = intrinsic_report(g, atoms, ev);
      if (json)
        out << serialize(Json{{"intrinsic", r.intrinsic()}, {"paths", r.paths.str()}, {"atoms", r.atoms}});
      else
        out << "paths=" << r.paths.str() << " atoms=" << r.atoms << " intrinsic=" << (r.intrinsic() ? "true" : "false")
            << "\n";
      return r.intrinsic() ? kTrue : kFalse;
    }

    if (condition_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto atoms = enumerate_atoms(g);
      auto ev = build_event(g, atoms, load_event(event_path));
      auto sub = condition(g, atoms, ev);
      auto doc = ceg_to_json(sub.ceg);
      doc["position_origin"] = sub.position_origin;
      doc["edge_origin"] = sub.edge_origin;
      detail::write_output(output, serialize(doc), out);
      if (!output.empty() && output != "-")
        out << "conditioned on " << ev.size() << " atoms, p = " << to_string(event_probability(g, atoms, ev)) << "\n";
      return kTrue;
    }

    if (curtail_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto c = curtail(g, detail::id_list(frontier));
      detail::write_output(output, serialize_ceg(c), out);
      return kTrue;
    }

    if (cutverts_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto cuts = cut_vertices(g);
      if (json) {
        out << serialize(Json{{"cut_vertices", cuts}});
      } else {
        for (std::size_t i = 0; i < cuts.size(); ++i) out << (i ? " " : "") << cuts[i];
        out << "\n";
      }
      return kTrue;
    }

    if (sep_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto v = separation_query(g, w1, w2);
      if (json) {
        Json j{{"independent", v.independent}, {"reason", std::string(to_string(v.reason))}, {"w1", w1}, {"w2", w2}};
        j["witness"] = v.witness ? Json(*v.witness) : Json(nullptr);
        out << serialize(j);
      } else if (v.independent) {
        out << "independent: X(" << w1 << ") and X(" << w2 << "), cut-vertex " << *v.witness << " ("
            << to_string(v.reason) << ")\n";
      } else {
        out << "dependent: no cut-vertex separates X(" << w1 << ") and X(" << w2 << ")\n";
      }
      return v.independent ? kTrue : kFalse;
    }

    if (csep_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      auto A = detail::id_list(wa), B = detail::id_list(wb);
      CutVerdict v;
      if (event_path.empty()) {
        v = cut_variable_query(g, A, B);
      } else {
        auto atoms = enumerate_atoms(g);
        auto ev = build_event(g, atoms, load_event(event_path));
        v = conditional_cut_query(g, A, B, atoms, ev);
      }
      if (json) {
        Json j{{"independent", v.independent}, {"wa", A}, {"wb", B}};
        j["witness"] = v.witness ? Json(*v.witness) : Json(nullptr);
        out << serialize(j);
      } else if (v.independent) {
        out << "independent";
        if (v.witness) out << ": cut-vertex " << *v.witness;
        out << "\n";
      } else {
        out << "no structural witness of independence\n";
      }
      return v.independent ? kTrue : kFalse;
    }

    if (oracle_cmd->parsed()) {
      auto g = load_ceg(input, popt);
      check_query_position(g, w1);
      check_query_position(g, w2);
      auto X = Variable::at(w1), Y = Variable::at(w2);
      std::optional<Event> ev;
      if (!event_path.empty()) ev = build_event(g, load_event(event_path));
      bool ok = generic_independent(g, std::span(&X, 1), std::span(&Y, 1), samples, seed, ev ? &*ev : nullptr);
      if (json)
        out << serialize(Json{{"independent", ok}, {"samples", samples}, {"seed", seed}});
      else
        out << (ok ? "independent" : "dependent") << " under the stored and " << samples << " random parameterizations (seed "
            << seed << ")\n";
      return ok ? kTrue : kFalse;
    }

    if (verify_cmd->parsed()) {
      EquivalenceOptions opt;
      opt.samples = samples;
      opt.seed = seed;
      SuiteBudget budget;
      budget.deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(budget_seconds));
      EquivalenceStats total;
      Json report = Json::object();
      bool complete = true;
      if (!corpus.empty()) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(corpus))
          if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        std::size_t checked = 0;
        for (const auto& f : files) {
          auto doc = ::ceg::detail::parse_json(read_file(f.string()));
          if (!doc.is_object() || !doc.contains("sink")) continue;
          if (budget.expired()) {
            complete = false;
            break;
          }
          total.merge(check_instance(parse_ceg(read_file(f.string()), popt).uncoloured(), opt));
          ++checked;
        }
        report["files"] = checked;
      } else {
        std::size_t done = 0;
        total.merge(run_random(random_count, max_random, opt, budget, &done));
        report["random_instances"] = done;
        complete = done == random_count;
        Json layers = Json::array();
        if (complete) {
          for (const auto& layer : run_exhaustive(max_nonsink, opt, budget)) {
            layers.push_back(Json{{"nonsink_positions", layer.nonsink},
                                  {"complete", layer.complete},
                                  {"instances", layer.stats.instances},
                                  {"pairs", layer.stats.pairs}});
            total.merge(layer.stats);
            complete = complete && layer.complete;
          }
          complete = complete && layers.size() == max_nonsink;
        }
        report["layers"] = layers;
      }
      bool ok = complete && total.disagreements == 0 && total.lift_failures == 0;
      report["complete"] = complete;
      report["instances"] = total.instances;
      report["pairs"] = total.pairs;
      report["disagreements"] = total.disagreements;
      report["lift_checks"] = total.lift_checks;
      report["lift_failures"] = total.lift_failures;
      report["failures"] = total.failures;
      if (json) {
        out << serialize(report);
      } else {
        out << "instances " << total.instances << ", pairs " << total.pairs << ", disagreements " << total.disagreements
            << ", lift checks " << total.lift_checks << ", lift failures " << total.lift_failures
            << (complete ? "" : " (budget exhausted before the corpus was covered)") << "\n";
        for (const auto& f : total.failures) out << "  " << f << "\n";
      }
      return ok ? kTrue : kFalse;
    }
  } catch (const Error& e) {
    if (json)
      out << serialize(Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
    else
      err << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kUsage;
}

}  // namespace ceg::cli
