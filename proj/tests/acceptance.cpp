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

// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace pgame;
using namespace testing_support;

namespace {

// pinned limits
constexpr std::size_t door_bound = 200;
constexpr double door_seconds = 60;
constexpr std::size_t door_expand_steps = 3;
constexpr int sat_instances = 50;
constexpr int sat_max_vars = 4;
constexpr int sat_max_clauses = 4;
constexpr double sat_seconds = 300;
constexpr int prc_min_prefixes = 20;
constexpr int foundation_min_prefixes = 100;
constexpr std::size_t glue_cut_sample = 4;
constexpr std::size_t bcp_depth = 11;
constexpr double bcp_seconds = 120;
constexpr int exhaustive_min_instances = 20;
constexpr std::size_t exhaustive_max_transitions = 6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  bool ok;
  std::string detail;
};

std::set<std::string> occ_labels(const BranchingProcess& bp, const Cut& c) {
  std::set<std::string> s;
  for (PlaceId p : c) s.insert(bp.occ().label(p));
  return s;
}

// random two-token games that validate
std::vector<Game> two_player_games(std::mt19937& rng, int want, std::size_t max_t) {
  std::vector<Game> out;
  for (int i = 0; out.size() < static_cast<std::size_t>(want) && i < 20 * want; ++i) {
    RandomGameShape s;
    s.transitions = 3 + static_cast<int>(i % (max_t - 2));
    s.states = 2 + i % 2;
    Game g = random_game(rng, s);
    if (g.net.transition_count() > max_t || !validate_game(g).ok() || player_count(g) != 2) continue;
    out.push_back(std::move(g));
  }
  return out;
}

std::map<PlaceId, std::vector<TransitionId>> door_rule(const Game& g, bool serve_first) {
  auto T = [&](const std::string& l) { return g.net.transition(l); };
  auto P = [&](const std::string& l) { return g.net.place(l); };
  std::string a = serve_first ? "1" : "2", b = serve_first ? "2" : "1";
  return {{P("S" + a + "1"), {T("r" + a)}}, {P("S" + b + "1"), {T("r" + b)}}, {P("S" + a + "2"), {T("t")}},
          {P("S" + b + "2"), {T("t")}},     {P("S" + a + "3"), {T("o" + a)}}, {P("S" + b + "3"), {T("d" + b)}},
          {P("S" + a + "4"), {T("c" + a)}}};
}

// ---------------------------------------------------------------------------

Line door_synthesis() {
  auto t0 = Clock::now();
  Game g = door();
  SynthesisResult r = synthesize(g, door_bound);
  if (!r.found()) return {false, "no strategy within bound"};
  Verdict v = verify(g, *r.prefix);
  StrategyPrefix e = expand(*r.prefix, door_expand_steps);
  Verdict ve = verify(g, e);
  double s = seconds_since(t0);
  std::ostringstream d;
  d << r.prefix->bp.transition_count() << " transitions, expanded " << e.bp.transition_count() << ", " << s << " s";
  return {v.passed() && ve.passed() && s < door_seconds, d.str()};
}

Line sat_equivalence() {
  auto t0 = Clock::now();
  std::mt19937 rng(2026);
  int mismatches = 0, sat = 0;
  for (int i = 0; i < sat_instances; ++i) {
    Cnf3 f = random_cnf(rng, sat_max_vars, sat_max_clauses);
    SynthesisResult r = synthesize(sat3_to_game(f), door_bound);
    bool want = truth_table_sat(f);
    if (r.status == SynthesisStatus::inconclusive || r.found() != want) ++mismatches;
    if (want) ++sat;
  }
  double s = seconds_since(t0);
  std::ostringstream d;
  d << sat_instances << " instances (" << sat << " satisfiable), " << mismatches << " mismatches, " << s << " s";
  return {mismatches == 0 && s < sat_seconds, d.str()};
}

Line prc_glue() {
  std::vector<std::pair<Game, StrategyPrefix>> corpus;
  Game d = door();
  SynthesisResult dr = synthesize(d, door_bound);
  if (dr.found()) {
    for (std::size_t k = 0; k <= 2; ++k) corpus.emplace_back(d, expand(*dr.prefix, k));
  }
  std::mt19937 rng(33);
  for (Game& g : two_player_games(rng, 60, 6)) {
    if (corpus.size() >= static_cast<std::size_t>(prc_min_prefixes) + 5) break;
    SynthesisResult r = synthesize(g, g.net.transition_count() * g.net.transition_count());
    if (r.found() && verify(g, *r.prefix).passed()) corpus.emplace_back(g, *r.prefix);
  }
  int pairs = 0, failures = 0;
  for (auto& [g, sp] : corpus) {
    Causality cz(sp.bp);
    LoopIndex li(sp.bp, cz);
    for (const PrcPair& p : find_prc(li)) {
      ++pairs;
      for (int dir = 0; dir < 2; ++dir) {
        const Cut& c1 = dir ? li.lkc(p.second) : li.lkc(p.first);
        const Cut& c2 = dir ? li.lkc(p.first) : li.lkc(p.second);
        StrategyPrefix out = cut_and_glue_prefix(sp, c1, c2);
        if (!validate_bp(out.bp).ok() || !verify(g, out).passed()) ++failures;
      }
    }
  }
  std::ostringstream o;
  o << corpus.size() << " prefixes, " << pairs << " prc pairs, " << failures << " failures";
  return {static_cast<int>(corpus.size()) >= prc_min_prefixes && pairs > 0 && failures == 0, o.str()};
}

Line sqc_glue() {
  Game g = door();
  int prefixes = 0, pairs = 0, failures = 0;
  for (bool serve_first : {true, false})
    for (std::size_t depth : {8u, 10u, 12u}) {
      RealizeOptions ro;
      ro.max_depth = depth;
      ro.prc_cutoffs = false;
      Realization r = realize(g, positional(g, door_rule(g, serve_first)), ro);
      if (!verify(g, r.prefix).passed()) {
        ++failures;
        continue;
      }
      ++prefixes;
      const BranchingProcess& bp = r.prefix.bp;
      Causality cz(bp);
      LoopIndex li(bp, cz);
      for (const SqcPair& p : find_sqc(li)) {
        ++pairs;
        StrategyPrefix out = cut_and_glue_prefix(r.prefix, li.lkc(p.first), li.lkc(p.second));
        if (!validate_bp(out.bp).ok() || !verify(g, out).passed()) ++failures;
      }
    }
  std::ostringstream o;
  o << prefixes << " prefixes, " << pairs << " sqc pairs, " << failures << " failures";
  return {pairs > 0 && failures == 0, o.str()};
}

Line foundation() {
  std::mt19937 rng(55);
  int prefixes = 0, failures = 0;
  std::uint64_t node_pairs = 0;
  for (int i = 0; prefixes < foundation_min_prefixes && i < 1000; ++i) {
    RandomGameShape s;
    s.players = 1 + i % 3;
    s.transitions = 3 + i % 5;
    Game g = random_game(rng, s);
    if (!validate_game(g).ok()) continue;
    BranchingProcess bp = unfold(g.net, UnfoldLimit{40, 2 + static_cast<std::size_t>(i % 3)}).bp;
    ++prefixes;
    Causality cz(bp);
    OrderOracle oracle(bp.occ());
    std::vector<Node> nodes;
    for (std::size_t p = 0; p < bp.place_count(); ++p) nodes.emplace_back(PlaceId(p));
    for (std::size_t t = 0; t < bp.transition_count(); ++t) nodes.emplace_back(TransitionId(t));
    for (Node x : nodes)
      for (Node y : nodes) {
        ++node_pairs;
        if (cz.classify(x, y) != oracle.classify(x, y)) ++failures;
      }
    std::vector<Cut> cs = cuts(bp, cz);
    if (as_index_sets(cs) != bfs_markings(bp.occ())) ++failures;
    for (std::size_t t = 0; t < bp.transition_count(); ++t) {
      Cut c = lkc(bp, cz, TransitionId(t));
      if (!is_cut(bp, cz, c) || !c.includes_all(bp.occ().post(TransitionId(t)))) ++failures;
    }
    for (std::size_t k = 0; k < cs.size() && k < glue_cut_sample; ++k)
      if (!is_isomorphic(cut_and_glue(bp, cs[k], cs[k]), bp)) ++failures;
  }
  std::ostringstream o;
  o << prefixes << " prefixes, " << node_pairs << " node pairs, " << failures << " failures";
  return {prefixes >= foundation_min_prefixes && failures == 0, o.str()};
}

Line fixtures() {
  Game g = door();
  StrategyPrefix f5 = load_strategy(g, "deny_second.strat");
  StrategyPrefix f6 = load_strategy(g, "sync.strat");
  auto lk = occ_labels(f5.bp, lkc(f5.bp, f5.bp.occ().transition("r2_1")));
  auto in = occ_labels(f6.bp, segment(f6.bp, f6.bp.occ().transition("t_1")).initial);
  bool a = lk == std::set<std::string>{"C1_1", "S11_1", "S22_1", "W2_1"};
  bool b = in == std::set<std::string>{"W1_1", "S13_2", "S23_2", "W2_1"};
  return {a && b, std::string("lkc(r2_1) ") + (a ? "matches" : "differs") + ", segment(t_1) initial cut " +
                      (b ? "matches" : "differs")};
}

Line bcp_sanity() {
  auto t0 = Clock::now();
  // constant colour on an unconstrained single-colour instance
  BcpInstance one = parse_bcp(read_file(data_path("single_colour.bcp")));
  Game g1 = bcp_to_game(one).game;
  std::map<PlaceId, std::vector<TransitionId>> rule;
  for (int a = 0; a < 3; ++a)
    rule[g1.net.place("s_" + std::to_string(a))] = {g1.net.transition("t_" + std::to_string(a) + "_white")};
  RealizeOptions ro;
  ro.max_depth = bcp_depth;
  ro.prc_cutoffs = false;
  Realization r1 = realize(g1, positional(g1, rule), ro);
  bool rounds = false;
  for (std::size_t i = 0; i < r1.prefix.bp.transition_count(); ++i)
    if (g1.net.label(r1.prefix.bp.image(TransitionId(i))).rfind("T_r3", 0) == 0) rounds = true;
  bool constant_ok = rounds && verify(g1, r1.prefix).passed();

  // no permitted initial colour: every first choice fails
  BcpInstance none = parse_bcp(read_file(data_path("empty_initial.bcp")));
  Game g2 = bcp_to_game(none).game;
  bool all_fail = true, init_hit = true;
  for (const auto& choice : detail::commitment_choices(g2.net, g2.net.place("s_0"))) {
    std::map<PlaceId, std::vector<TransitionId>> rr;
    for (int a = 0; a < 3; ++a) {
      std::vector<TransitionId> ts;
      for (TransitionId t : choice) {
        std::string c = g2.net.label(t).substr(4);
        ts.push_back(g2.net.transition("t_" + std::to_string(a) + "_" + c));
      }
      rr[g2.net.place("s_" + std::to_string(a))] = ts;
    }
    RealizeOptions r2o;
    r2o.max_depth = 2;
    r2o.prc_cutoffs = false;
    Realization r2 = realize(g2, positional(g2, rr), r2o);
    Verdict v = verify(g2, r2.prefix);
    if (v.passed()) all_fail = false;
    if (choice.size() == 1 && !(v.safety.outcome == Outcome::fail && v.safety.witness->bad->size() == 2))
      init_hit = false;
  }
  double s = seconds_since(t0);
  std::ostringstream o;
  o << "constant colour " << (constant_ok ? "passes" : "fails") << " (" << r1.prefix.bp.transition_count()
    << " transitions), empty initial set " << (all_fail && init_hit ? "has no passing choice" : "admits a choice")
    << ", " << s << " s";
  return {constant_ok && all_fail && init_hit && s < bcp_seconds, o.str()};
}

Line exhaustive() {
  std::mt19937 rng(88);
  int instances = 0, mismatches = 0, winning = 0;
  for (Game& g : two_player_games(rng, exhaustive_min_instances + 5, exhaustive_max_transitions)) {
    std::size_t bound = g.net.transition_count() * g.net.transition_count();
    std::uint64_t leaves = 0;
    bool brute = brute_force_winning(g, bound, leaves);
    SynthesisResult r = synthesize(g, bound);
    if (r.status == SynthesisStatus::inconclusive || r.found() != brute) ++mismatches;
    if (brute) ++winning;
    ++instances;
  }
  std::ostringstream o;
  o << instances << " instances (" << winning << " winning), " << mismatches << " mismatches";
  return {instances >= exhaustive_min_instances && mismatches == 0, o.str()};
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, Line (*)()>> all = {
      {"door synthesis", door_synthesis},   {"sat equivalence", sat_equivalence}, {"prc cut and glue", prc_glue},
      {"sqc cut and glue", sqc_glue},       {"foundation invariants", foundation}, {"fixture equalities", fixtures},
      {"bcp generator", bcp_sanity},        {"exhaustive agreement", exhaustive}};
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Line l;
    try {
      l = all[i].second();
    } catch (const std::exception& e) {
      l = {false, std::string("exception: ") + e.what()};
    }
    if (!l.ok) ++failed;
    std::cout << "criterion " << i + 1 << " " << all[i].first << ": " << (l.ok ? "PASS" : "FAIL") << " (" << l.detail
              << ")" << std::endl;
  }
  return failed ? 1 : 0;
}
