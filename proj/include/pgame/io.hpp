/*
 * Copyright 2026 The pgame Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "pgame/reduce.hpp"
#include "pgame/synth.hpp"

namespace pgame {

// Line-oriented text formats. Labels double as identifiers; '#' starts a
// comment line, "# note: " lines carry generator metadata.
//
//   pgame-game 1
//   places
//   <label> system|env [initial]
//   transitions
//   <label> : <pre labels> -> <post labels>
//   bad
//   <place labels>
//
//   pgame-strategy 1
//   base <fingerprint>
//   places
//   <label> <image label> [initial]
//   transitions
//   <label> <image label> : <pre labels> -> <post labels>
//   frontier
//   <cutoff label> -> <target label> prc|sqc
//   horizon
//   <place labels>

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline bool valid_ident(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || !std::isprint(static_cast<unsigned char>(c)))
      return false;
  for (const char* k : {":", "->", "places", "transitions", "bad", "frontier", "horizon", "base"})
    if (s == k) return false;
  return true;
}

struct LineReader {
  explicit LineReader(const std::string& text) : in(text) {}
  std::istringstream in;
  std::size_t line_no = 0;
  std::vector<std::string> notes;

  // next non-empty, non-comment line
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      line = line.substr(b);
      if (line[0] == '#') {
        if (line.rfind("# note: ", 0) == 0) notes.push_back(line.substr(8));
        continue;
      }
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw input_error("line " + std::to_string(line_no) + ": " + msg);
  }
};

// splits "a b : c d -> e f" into the part before ':' and the two lists
struct ArcLine {
  std::vector<std::string> head, pre, post;
};

inline ArcLine parse_arc_line(const LineReader& r, const std::string& line) {
  auto w = split_ws(line);
  ArcLine a;
  std::size_t i = 0;
  for (; i < w.size() && w[i] != ":"; ++i) a.head.push_back(w[i]);
  if (i == w.size()) r.fail("expected ':'");
  for (++i; i < w.size() && w[i] != "->"; ++i) a.pre.push_back(w[i]);
  if (i == w.size()) r.fail("expected '->'");
  for (++i; i < w.size(); ++i) a.post.push_back(w[i]);
  return a;
}

inline std::string join_labels(const Net& n, std::span<const PlaceId> ps) {
  std::string s;
  for (PlaceId p : ps) {
    if (!s.empty()) s += ' ';
    s += n.label(p);
  }
  return s;
}

inline void expect_header(LineReader& r, const std::string& magic) {
  std::string line;
  if (!r.next(line)) throw input_error("empty file");
  auto w = split_ws(line);
  if (w.size() != 2 || w[0] != magic) r.fail("expected header '" + magic + " 1'");
  if (w[1] != "1") r.fail("unsupported format version " + w[1]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// games

inline std::string emit_game(const Game& g, const std::vector<std::string>& notes = {}) {
  std::ostringstream o;
  o << "pgame-game 1\n";
  for (const auto& n : notes) o << "# note: " << n << '\n';
  const Net& n = g.net;
  for (std::size_t i = 0; i < n.place_count(); ++i)
    if (!detail::valid_ident(n.label(PlaceId(i)))) throw input_error("label '" + n.label(PlaceId(i)) + "' cannot be written");
  for (std::size_t i = 0; i < n.transition_count(); ++i)
    if (!detail::valid_ident(n.label(TransitionId(i))))
      throw input_error("label '" + n.label(TransitionId(i)) + "' cannot be written");
  o << "places\n";
  for (std::size_t i = 0; i < n.place_count(); ++i) {
    PlaceId p(i);
    o << n.label(p) << ' ' << (g.is_system(p) ? "system" : "env");
    if (n.is_initial(p)) o << " initial";
    o << '\n';
  }
  o << "transitions\n";
  for (std::size_t i = 0; i < n.transition_count(); ++i) {
    TransitionId t(i);
    o << n.label(t) << " :";
    for (PlaceId p : n.pre(t)) o << ' ' << n.label(p);
    o << " ->";
    for (PlaceId p : n.post(t)) o << ' ' << n.label(p);
    o << '\n';
  }
  o << "bad\n";
  for (const auto& b : g.bad) o << detail::join_labels(n, b.places()) << '\n';
  return o.str();
}

struct ParsedGame {
  Game game;
  std::vector<std::string> notes;
};

inline ParsedGame parse_game_with_notes(const std::string& text) {
  detail::LineReader r(text);
  detail::expect_header(r, "pgame-game");
  ParsedGame out;
  Game& g = out.game;
  enum { none, places, transitions, bad } sec = none;
  auto place = [&](const std::string& l) {
    auto p = g.net.find_place(l);
    if (!p) r.fail("unknown place '" + l + "'");
    return *p;
  };
  std::string line;
  while (r.next(line)) {
    if (line == "places") { if (sec != none) r.fail("sections out of order"); sec = places; continue; }
    if (line == "transitions") { if (sec != places) r.fail("sections out of order"); sec = transitions; continue; }
    if (line == "bad") { if (sec != transitions) r.fail("sections out of order"); sec = bad; continue; }
    switch (sec) {
      case none: r.fail("expected section 'places'");
      case places: {
        auto w = detail::split_ws(line);
        if (w.size() < 2 || w.size() > 3) r.fail("expected '<label> system|env [initial]'");
        if (!detail::valid_ident(w[0])) r.fail("bad label '" + w[0] + "'");
        if (g.net.find_place(w[0])) r.fail("duplicate place '" + w[0] + "'");
        Owner o;
        if (w[1] == "system") o = Owner::system;
        else if (w[1] == "env") o = Owner::environment;
        else r.fail("owner must be 'system' or 'env'");
        bool init = false;
        if (w.size() == 3) {
          if (w[2] != "initial") r.fail("unexpected '" + w[2] + "'");
          init = true;
        }
        g.add_place(w[0], o, init);
        break;
      }
      case transitions: {
        auto a = detail::parse_arc_line(r, line);
        if (a.head.size() != 1 || !detail::valid_ident(a.head[0])) r.fail("expected one transition label");
        if (g.net.find_transition(a.head[0]) || g.net.find_place(a.head[0]))
          r.fail("duplicate label '" + a.head[0] + "'");
        std::vector<PlaceId> pre, post;
        for (auto& l : a.pre) pre.push_back(place(l));
        for (auto& l : a.post) post.push_back(place(l));
        g.add_transition(a.head[0], pre, post);
        break;
      }
      case bad: {
        std::vector<PlaceId> ps;
        for (auto& l : detail::split_ws(line)) ps.push_back(place(l));
        g.add_bad(Marking(ps));
        break;
      }
    }
  }
  if (sec == none) throw input_error("missing section 'places'");
  ValidationReport rep = validate_net(g.net);
  if (!rep.ok()) throw input_error("invalid net: " + rep.violations.front().rule);
  out.notes = std::move(r.notes);
  return out;
}

inline Game parse_game(const std::string& text) { return parse_game_with_notes(text).game; }

// ---------------------------------------------------------------------------
// strategies

// FNV-1a over the emitted net
inline std::string fingerprint(const Net& n) {
  Game g;
  g.net = n;
  g.owner.assign(n.place_count(), Owner::environment);
  std::string s = emit_game(g);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

inline std::string emit_strategy(const StrategyPrefix& sp) {
  const BranchingProcess& bp = sp.bp;
  const Net& occ = bp.occ();
  const Net& base = bp.base();
  std::ostringstream o;
  o << "pgame-strategy 1\n";
  o << "base " << fingerprint(base) << '\n';
  o << "places\n";
  for (std::size_t i = 0; i < occ.place_count(); ++i) {
    PlaceId p(i);
    o << occ.label(p) << ' ' << base.label(bp.image(p));
    if (occ.is_initial(p)) o << " initial";
    o << '\n';
  }
  o << "transitions\n";
  Causality cz(bp);
  for (TransitionId t : cz.topological_order()) {
    o << occ.label(t) << ' ' << base.label(bp.image(t)) << " :";
    for (PlaceId p : occ.pre(t)) o << ' ' << occ.label(p);
    o << " ->";
    for (PlaceId p : occ.post(t)) o << ' ' << occ.label(p);
    o << '\n';
  }
  o << "frontier\n";
  for (const auto& f : sp.frontier)
    o << occ.label(f.cutoff) << " -> " << occ.label(f.target) << ' ' << to_string(f.kind) << '\n';
  o << "horizon\n";
  if (!sp.horizon.empty()) o << detail::join_labels(occ, sp.horizon) << '\n';
  return o.str();
}

// Places are added first; the transitions may come in any order.
inline StrategyPrefix parse_strategy(const std::string& text, std::shared_ptr<const Net> base) {
  detail::LineReader r(text);
  detail::expect_header(r, "pgame-strategy");
  StrategyPrefix sp{BranchingProcess(base), {}, {}};
  BranchingProcess& bp = sp.bp;
  enum { none, places, transitions, frontier, horizon } sec = none;
  bool have_base = false;
  auto place = [&](const std::string& l) {
    auto p = bp.occ().find_place(l);
    if (!p) r.fail("unknown place '" + l + "'");
    return *p;
  };
  auto trans = [&](const std::string& l) {
    auto t = bp.occ().find_transition(l);
    if (!t) r.fail("unknown transition '" + l + "'");
    return *t;
  };
  // instance number from a "<image>_<k>" label, else automatic
  auto instance_of = [](const std::string& label, const std::string& image) -> std::uint32_t {
    if (label.size() <= image.size() + 1 || label.compare(0, image.size(), image) != 0 ||
        label[image.size()] != '_')
      return 0;
    std::string k = label.substr(image.size() + 1);
    if (k.size() > 9 || !std::all_of(k.begin(), k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return 0;
    return static_cast<std::uint32_t>(std::stoul(k));
  };
  std::string line;
  while (r.next(line)) {
    auto w = detail::split_ws(line);
    if (w.size() == 2 && w[0] == "base") {
      if (sec != none || have_base) r.fail("misplaced base line");
      if (w[1] != fingerprint(*base)) throw input_error("strategy is not a process of the game's net");
      have_base = true;
      continue;
    }
    if (line == "places") { if (sec != none) r.fail("sections out of order"); sec = places; continue; }
    if (line == "transitions") { if (sec != places) r.fail("sections out of order"); sec = transitions; continue; }
    if (line == "frontier") { if (sec != transitions) r.fail("sections out of order"); sec = frontier; continue; }
    if (line == "horizon") { if (sec != frontier) r.fail("sections out of order"); sec = horizon; continue; }
    switch (sec) {
      case none: r.fail("expected section 'places'");
      case places: {
        if (w.size() < 2 || w.size() > 3) r.fail("expected '<label> <image> [initial]'");
        if (!detail::valid_ident(w[0])) r.fail("bad label '" + w[0] + "'");
        if (bp.occ().find_place(w[0])) r.fail("duplicate place '" + w[0] + "'");
        auto img = base->find_place(w[1]);
        if (!img) r.fail("unknown base place '" + w[1] + "'");
        bool init = false;
        if (w.size() == 3) {
          if (w[2] != "initial") r.fail("unexpected '" + w[2] + "'");
          init = true;
        }
        bp.add_place(*img, w[0], init, {}, instance_of(w[0], w[1]));
        break;
      }
      case transitions: {
        auto a = detail::parse_arc_line(r, line);
        if (a.head.size() != 2) r.fail("expected '<label> <image> : pre -> post'");
        if (!detail::valid_ident(a.head[0])) r.fail("bad label '" + a.head[0] + "'");
        if (bp.occ().find_transition(a.head[0]) || bp.occ().find_place(a.head[0]))
          r.fail("duplicate label '" + a.head[0] + "'");
        auto img = base->find_transition(a.head[1]);
        if (!img) r.fail("unknown base transition '" + a.head[1] + "'");
        std::vector<PlaceId> pre, post;
        for (auto& l : a.pre) pre.push_back(place(l));
        for (auto& l : a.post) post.push_back(place(l));
        bp.add_transition(*img, a.head[0], pre, post, {}, instance_of(a.head[0], a.head[1]));
        break;
      }
      case frontier: {
        if (w.size() != 4 || w[1] != "->") r.fail("expected '<cutoff> -> <target> prc|sqc'");
        FrontierEntry f{trans(w[0]), trans(w[2]), ImitationKind::prc};
        if (w[3] == "sqc") f.kind = ImitationKind::sqc;
        else if (w[3] != "prc") r.fail("imitation kind must be 'prc' or 'sqc'");
        sp.frontier.push_back(f);
        break;
      }
      case horizon:
        for (auto& l : w) sp.horizon.push_back(place(l));
        break;
    }
  }
  if (!have_base) throw input_error("missing base line");
  if (sec == none) throw input_error("missing section 'places'");
  ValidationReport rep = validate_bp(bp);
  if (!rep.ok()) throw input_error("invalid branching process: " + rep.violations.front().rule);
  return sp;
}

// ---------------------------------------------------------------------------
// graph export

inline std::string dot_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '"' || c == '\\') o += '\\';
    o += c;
  }
  return o;
}

// system places filled, environment places unfilled
inline std::string to_dot(const BranchingProcess& bp, const std::vector<Owner>& owner) {
  const Net& occ = bp.occ();
  std::ostringstream o;
  o << "digraph bp {\n  rankdir=TB;\n";
  for (std::size_t i = 0; i < occ.place_count(); ++i) {
    PlaceId p(i);
    bool sys = owner.at(bp.image(p).index()) == Owner::system;
    o << "  p" << i << " [shape=circle,label=\"" << dot_escape(occ.label(p)) << '"'
      << (sys ? ",style=filled,fillcolor=gray" : "") << (occ.is_initial(p) ? ",peripheries=2" : "") << "];\n";
  }
  for (std::size_t i = 0; i < occ.transition_count(); ++i)
    o << "  t" << i << " [shape=box,label=\"" << dot_escape(occ.label(TransitionId(i))) << "\"];\n";
  for (std::size_t i = 0; i < occ.transition_count(); ++i) {
    TransitionId t(i);
    for (PlaceId p : occ.pre(t)) o << "  p" << p.index() << " -> t" << i << ";\n";
    for (PlaceId p : occ.post(t)) o << "  t" << i << " -> p" << p.index() << ";\n";
  }
  o << "}\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// instances

// DIMACS-like CNF. Clauses with fewer than three literals are padded by
// repeating their last literal.
inline Cnf3 parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  Cnf3 f;
  bool header = false;
  std::size_t declared = 0;
  std::vector<int> cur;
  std::string line;
  std::size_t no = 0;
  auto fail = [&](const std::string& m) { throw input_error("line " + std::to_string(no) + ": " + m); };
  while (std::getline(in, line)) {
    ++no;
    auto w = detail::split_ws(line);
    if (w.empty() || w[0] == "c" || w[0][0] == 'c' || w[0][0] == '%') continue;
    if (w[0] == "p") {
      if (header) fail("duplicate header");
      if (w.size() != 4 || w[1] != "cnf") fail("expected 'p cnf <vars> <clauses>'");
      try {
        f.variables = std::stoi(w[2]);
        declared = std::stoul(w[3]);
      } catch (const std::exception&) {
        fail("bad header numbers");
      }
      header = true;
      continue;
    }
    if (!header) fail("clause before header");
    for (auto& tok : w) {
      int l;
      try {
        std::size_t used = 0;
        l = std::stoi(tok, &used);
        if (used != tok.size()) fail("bad literal '" + tok + "'");
      } catch (const input_error&) {
        throw;
      } catch (const std::exception&) {
        fail("bad literal '" + tok + "'");
      }
      if (l == 0) {
        if (cur.empty()) fail("empty clause");
        if (cur.size() > 3) fail("clause with more than three literals");
        while (cur.size() < 3) cur.push_back(cur.back());
        f.clauses.push_back({cur[0], cur[1], cur[2]});
        cur.clear();
      } else {
        cur.push_back(l);
      }
    }
  }
  if (!header) throw input_error("missing 'p cnf' header");
  if (!cur.empty()) throw input_error("unterminated clause");
  if (f.clauses.size() != declared) throw input_error("clause count does not match header");
  validate(f);
  return f;
}

inline std::string emit_dimacs(const Cnf3& f) {
  std::ostringstream o;
  o << "p cnf " << f.variables << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) o << c[0] << ' ' << c[1] << ' ' << c[2] << " 0\n";
  return o.str();
}

// keyword lines: "colours c1 c2 ...", "initial c ...", "dp u v", "hp u v", "vp u v"
inline BcpInstance parse_bcp(const std::string& text) {
  detail::LineReader r(text);
  BcpInstance in;
  bool have_colours = false;
  std::string line;
  while (r.next(line)) {
    auto w = detail::split_ws(line);
    const std::string& k = w[0];
    if (k == "colours" || k == "colors") {
      if (have_colours) r.fail("duplicate colours line");
      in.colours.assign(w.begin() + 1, w.end());
      have_colours = true;
    } else if (k == "initial") {
      in.initial.insert(in.initial.end(), w.begin() + 1, w.end());
    } else if (k == "dp" || k == "hp" || k == "vp") {
      if (w.size() != 3) r.fail("expected '" + k + " <colour> <colour>'");
      auto& s = k == "dp" ? in.dp : k == "hp" ? in.hp : in.vp;
      s.emplace_back(w[1], w[2]);
    } else {
      r.fail("unknown keyword '" + k + "'");
    }
  }
  if (!have_colours) throw input_error("missing colours line");
  validate(in);
  return in;
}

// ---------------------------------------------------------------------------
// reports

namespace detail {

inline nlohmann::ordered_json labels(const Net& n, std::span<const PlaceId> ps) {
  auto a = nlohmann::ordered_json::array();
  for (PlaceId p : ps) a.push_back(n.label(p));
  return a;
}

inline nlohmann::ordered_json to_json(const BranchingProcess& bp, const PropertyVerdict& v) {
  const Net& occ = bp.occ();
  nlohmann::ordered_json j;
  j["outcome"] = to_string(v.outcome);
  if (v.witness) {
    const Witness& w = *v.witness;
    nlohmann::ordered_json x;
    x["reason"] = w.reason;
    x["cut"] = labels(occ, w.cut.places());
    auto run = nlohmann::ordered_json::array();
    for (TransitionId t : w.run) run.push_back(occ.label(t));
    x["run"] = run;
    if (w.refused) x["refused"] = bp.base().label(*w.refused);
    if (w.place) x["place"] = occ.label(*w.place);
    if (!w.transitions.empty()) {
      auto ts = nlohmann::ordered_json::array();
      for (TransitionId t : w.transitions) ts.push_back(occ.label(t));
      x["transitions"] = ts;
    }
    if (w.bad) x["bad"] = labels(bp.base(), w.bad->places());
    j["witness"] = x;
  }
  if (!v.deferred.empty()) {
    auto d = nlohmann::ordered_json::array();
    for (const Cut& c : v.deferred) d.push_back(labels(occ, c.places()));
    j["deferred"] = d;
  }
  return j;
}

}  // namespace detail

inline std::string verdict_json(const BranchingProcess& bp, const Verdict& v) {
  nlohmann::ordered_json j;
  j["passed"] = v.passed();
  j["justified_refusal"] = detail::to_json(bp, v.justified_refusal);
  j["safety"] = detail::to_json(bp, v.safety);
  j["determinism"] = detail::to_json(bp, v.determinism);
  j["deadlock_avoiding"] = detail::to_json(bp, v.deadlock_avoiding);
  j["frontier_errors"] = v.frontier_errors;
  return j.dump(2) + "\n";
}

inline std::string synthesis_json(const SynthesisResult& r) {
  nlohmann::ordered_json j;
  j["status"] = to_string(r.status);
  j["players"] = r.players;
  if (r.prefix) {
    const Net& occ = r.prefix->bp.occ();
    j["transitions"] = r.prefix->bp.transition_count();
    auto m = nlohmann::ordered_json::array();
    for (const auto& e : r.imitation_map) {
      nlohmann::ordered_json x;
      x["source"] = detail::labels(occ, e.source.places());
      x["target"] = detail::labels(occ, e.target.places());
      x["kind"] = to_string(e.kind);
      m.push_back(x);
    }
    j["imitation_map"] = m;
  }
  return j.dump(2) + "\n";
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace pgame
