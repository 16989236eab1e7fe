#pragma once

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ceg/ceg.hpp"
#include "ceg/tree.hpp"

// JSON formats
//   tree:  {"vertices": n, "edges": [{"from": i, "to": j, "label": s, "prob": "p/q"}]}
//   ceg:   same plus "sink": id and optional "stages": [[ids]]
//   event: {"atoms": [ids]} or {"expr": node}, where node is one of
//          {"through": w} {"through": [w, w2]} {"edge": [w, w2, label]}
//          {"subpath": [[w, w2, label], ...]} {"label": s} {"atoms": [ids]}
//          {"op": "union" | "intersection" | "complement", "args": [nodes]}
// Unknown keys (such as "notes") are ignored.

namespace ceg {

using Json = nlohmann::ordered_json;

struct ParseOptions {
  std::optional<DecimalSnap> snap;
};

namespace detail {

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points at the last character read.
    std::size_t offset = e.byte == 0 ? 0 : std::min(e.byte - 1, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::SyntaxError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                                            std::string(e.what()));
  }
}

[[noreturn]] inline void semantic(const std::string& what) { throw Error(ErrorCode::SemanticError, what); }

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) semantic(where + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) semantic(where + " is missing \"" + key + "\"");
  return *it;
}

inline std::uint32_t id_value(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned()) semantic(where + " must be a nonnegative integer");
  auto v = j.get<std::uint64_t>();
  if (v > 0xffffffffu) semantic(where + " is out of range");
  return static_cast<std::uint32_t>(v);
}

inline std::string string_value(const Json& j, const std::string& where) {
  if (!j.is_string()) semantic(where + " must be a string");
  return j.get<std::string>();
}

inline Rat prob_value(const Json& j, const std::string& where, const ParseOptions& opt) {
  if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
  if (!j.is_string()) semantic(where + " must be a string such as \"1/3\" or \"0.25\"");
  try {
    return parse_rat(j.get<std::string>(), opt.snap);
  } catch (const Error& e) {
    semantic(where + ": " + e.what());
  }
}

struct RawEdge {
  std::uint32_t from, to;
  std::string label;
  Rat prob;
};

inline std::vector<RawEdge> parse_edges(const Json& doc, std::size_t vertex_count, const ParseOptions& opt) {
  const auto& edges = field(doc, "edges", "document");
  if (!edges.is_array()) semantic("\"edges\" must be an array");
  std::vector<RawEdge> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    std::string where = "edge " + std::to_string(i);
    const auto& e = edges[i];
    RawEdge r{id_value(field(e, "from", where), where + " \"from\""), id_value(field(e, "to", where), where + " \"to\""),
              string_value(field(e, "label", where), where + " \"label\""),
              prob_value(field(e, "prob", where), where + " \"prob\"", opt)};
    if (r.from >= vertex_count) semantic(where + " references vertex " + std::to_string(r.from) + " but there are only " + std::to_string(vertex_count));
    if (r.to >= vertex_count) semantic(where + " references vertex " + std::to_string(r.to) + " but there are only " + std::to_string(vertex_count));
    out.push_back(std::move(r));
  }
  return out;
}

template <class T>
T validated(auto&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SyntaxError || e.code() == ErrorCode::SemanticError) throw;
    semantic(e.what());
  }
}

inline Json edge_json(std::uint32_t from, std::uint32_t to, const std::string& label, const Rat& prob) {
  Json e = Json::object();
  e["from"] = from;
  e["to"] = to;
  e["label"] = label;
  e["prob"] = to_string(prob);
  return e;
}

}  // namespace detail

inline EventTree parse_tree(std::string_view text, const ParseOptions& opt = {}) {
  auto doc = detail::parse_json(text);
  auto n = detail::id_value(detail::field(doc, "vertices", "document"), "\"vertices\"");
  auto raw = detail::parse_edges(doc, n, opt);
  return detail::validated<EventTree>([&] {
    std::vector<TreeEdge> edges;
    for (auto& r : raw) edges.push_back({r.from, r.to, r.label, r.prob});
    return EventTree::build(n, std::move(edges));
  });
}

inline Ceg parse_ceg(std::string_view text, const ParseOptions& opt = {}) {
  auto doc = detail::parse_json(text);
  auto n = detail::id_value(detail::field(doc, "vertices", "document"), "\"vertices\"");
  auto sink = detail::id_value(detail::field(doc, "sink", "document"), "\"sink\"");
  auto raw = detail::parse_edges(doc, n, opt);
  PositionClasses stages;
  if (auto it = doc.find("stages"); it != doc.end()) {
    if (!it->is_array()) detail::semantic("\"stages\" must be an array of id arrays");
    for (const auto& cls : *it) {
      if (!cls.is_array()) detail::semantic("\"stages\" must be an array of id arrays");
      std::vector<PositionId> members;
      for (const auto& w : cls) members.push_back(detail::id_value(w, "stage member"));
      stages.push_back(std::move(members));
    }
  }
  return detail::validated<Ceg>([&] {
    std::vector<CegEdge> edges;
    for (auto& r : raw) edges.push_back({r.from, r.to, r.label, r.prob});
    return Ceg::build(n, sink, std::move(edges), stages);
  });
}

namespace detail {

inline EdgeRef edge_ref(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) semantic(where + " must be [from, to, label]");
  return {id_value(j[0], where + " source"), id_value(j[1], where + " target"), string_value(j[2], where + " label")};
}

inline std::vector<std::size_t> atom_list(const Json& j) {
  if (!j.is_array()) semantic("\"atoms\" must be an array of atom ids");
  std::vector<std::size_t> ids;
  for (const auto& a : j) ids.push_back(id_value(a, "atom id"));
  return ids;
}

inline EventExpr expr_from_json(const Json& j) {
  if (!j.is_object()) semantic("event expression nodes must be objects");
  if (auto it = j.find("op"); it != j.end()) {
    auto op = string_value(*it, "\"op\"");
    const auto& args = field(j, "args", "\"" + op + "\" node");
    if (!args.is_array()) semantic("\"args\" must be an array");
    std::vector<EventExpr> parts;
    for (const auto& a : args) parts.push_back(expr_from_json(a));
    if (op == "union") return EventExpr::union_of(std::move(parts));
    if (op == "intersection") return EventExpr::intersection_of(std::move(parts));
    if (op == "complement") {
      if (parts.size() != 1) semantic("\"complement\" takes exactly one argument");
      return EventExpr::complement(std::move(parts.front()));
    }
    semantic("unknown operator \"" + op + "\"");
  }
  if (auto it = j.find("through"); it != j.end()) {
    if (it->is_array()) {
      if (it->size() != 2) semantic("\"through\" takes one position or a pair");
      return EventExpr::through(id_value((*it)[0], "\"through\""), id_value((*it)[1], "\"through\""));
    }
    return EventExpr::through(id_value(*it, "\"through\""));
  }
  if (auto it = j.find("edge"); it != j.end()) {
    auto r = edge_ref(*it, "\"edge\"");
    return EventExpr::edge(r.source, r.target, r.label);
  }
  if (auto it = j.find("subpath"); it != j.end()) {
    if (!it->is_array() || it->empty()) semantic("\"subpath\" must be a nonempty array of edges");
    std::vector<EdgeRef> path;
    for (const auto& e : *it) path.push_back(edge_ref(e, "\"subpath\" edge"));
    return EventExpr::subpath(std::move(path));
  }
  if (auto it = j.find("label"); it != j.end()) return EventExpr::with_label(string_value(*it, "\"label\""));
  if (auto it = j.find("atoms"); it != j.end()) return EventExpr::atoms(atom_list(*it));
  semantic("unrecognised event expression");
}

inline Json expr_to_json(const EventExpr& x) {
  using Op = EventExpr::Op;
  Json j = Json::object();
  auto edge = [](const EdgeRef& r) { return Json::array({r.source, r.target, r.label}); };
  switch (x.op) {
    case Op::Atoms: j["atoms"] = x.atom_ids; break;
    case Op::Through: j["through"] = x.positions.at(0); break;
    case Op::ThroughPair: j["through"] = Json::array({x.positions.at(0), x.positions.at(1)}); break;
    case Op::Edge: j["edge"] = edge(x.edges.at(0)); break;
    case Op::Subpath: {
      Json path = Json::array();
      for (const auto& r : x.edges) path.push_back(edge(r));
      j["subpath"] = path;
      break;
    }
    case Op::Label: j["label"] = x.label; break;
    case Op::Union:
    case Op::Intersection:
    case Op::Complement: {
      j["op"] = x.op == Op::Union ? "union" : x.op == Op::Intersection ? "intersection" : "complement";
      Json args = Json::array();
      for (const auto& a : x.args) args.push_back(expr_to_json(a));
      j["args"] = args;
      break;
    }
  }
  return j;
}

}  // namespace detail

/// Event files hold either an atom list or an expression; both come back
/// as an expression (an atom list is the Atoms primitive).
inline EventExpr parse_event(std::string_view text) {
  auto doc = detail::parse_json(text);
  if (!doc.is_object()) detail::semantic("an event document must be an object");
  if (auto it = doc.find("expr"); it != doc.end()) return detail::expr_from_json(*it);
  if (auto it = doc.find("atoms"); it != doc.end()) return EventExpr::atoms(detail::atom_list(*it));
  detail::semantic("an event document needs \"expr\" or \"atoms\"");
}

inline Json tree_to_json(const EventTree& t) {
  Json doc = Json::object();
  doc["vertices"] = t.vertex_count();
  Json edges = Json::array();
  for (const auto& e : t.edges()) edges.push_back(detail::edge_json(e.source, e.target, e.label, e.prob));
  doc["edges"] = edges;
  return doc;
}

inline Json ceg_to_json(const Ceg& g) {
  Json doc = Json::object();
  doc["vertices"] = g.position_count();
  doc["sink"] = g.sink();
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back(detail::edge_json(e.source, e.target, e.label, e.prob));
  doc["edges"] = edges;
  doc["stages"] = coloured_stages(g);
  return doc;
}

inline Json event_to_json(const EventExpr& x) {
  Json doc = Json::object();
  if (x.op == EventExpr::Op::Atoms) {
    doc["atoms"] = x.atom_ids;
  } else {
    doc["expr"] = detail::expr_to_json(x);
  }
  return doc;
}

inline Json event_to_json(const Event& ev) {
  Json doc = Json::object();
  doc["atoms"] = ev.atoms;
  return doc;
}

/// Canonical text: two-space indentation, trailing newline.
inline std::string serialize(const Json& j) { return j.dump(2) + "\n"; }
inline std::string serialize_tree(const EventTree& t) { return serialize(tree_to_json(t)); }
inline std::string serialize_ceg(const Ceg& g) { return serialize(ceg_to_json(g)); }
inline std::string serialize_event(const EventExpr& x) { return serialize(event_to_json(x)); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline EventTree load_tree(const std::string& path, const ParseOptions& opt = {}) { return parse_tree(read_file(path), opt); }
inline Ceg load_ceg(const std::string& path, const ParseOptions& opt = {}) { return parse_ceg(read_file(path), opt); }
inline EventExpr load_event(const std::string& path) { return parse_event(read_file(path)); }

/// Atom as its label sequence, e.g. "male > before > C > <50".
inline std::string describe_atom(const Ceg& g, const Atom& a) {
  std::string s;
  for (auto e : a.edges) {
    if (!s.empty()) s += " > ";
    s += g.edge(e).label;
  }
  return s;
}

}  // namespace ceg
