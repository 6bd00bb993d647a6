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

// pgame: solve, verify, unfold and reduce on the command line.
//
// Exit codes: 0 found / passed, 1 not found / failed, 2 input error,
// 3 inconclusive.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "pgame/pgame.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_no = 1;
constexpr int exit_input = 2;
constexpr int exit_inconclusive = 3;

constexpr std::size_t default_bound = 200;
constexpr std::uint64_t default_budget_ms = 60000;

pgame::Game load_game(const std::string& path) {
  pgame::Game g = pgame::parse_game(pgame::read_file(path));
  auto rep = pgame::validate_game(g);
  if (!rep.ok()) {
    std::string what = rep.violations.front().rule;
    for (const auto& n : rep.violations.front().nodes) what += " " + n;
    throw pgame::input_error("invalid game: " + what);
  }
  return g;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    pgame::write_file(path, text);
}

std::uint64_t budget_from_env() {
  const char* s = std::getenv("PGAME_BUDGET_MS");
  if (!s || !*s) return default_budget_ms;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw pgame::input_error("PGAME_BUDGET_MS is not a number");
  return v;
}

void print_verdict(const pgame::BranchingProcess& bp, const pgame::Verdict& v) {
  const pgame::Net& occ = bp.occ();
  auto line = [&](const char* name, const pgame::PropertyVerdict& p) {
    std::cout << name << ": " << pgame::to_string(p.outcome) << '\n';
    if (!p.witness) return;
    const auto& w = *p.witness;
    std::cout << "  reason: " << w.reason << '\n';
    std::cout << "  cut:";
    for (auto q : w.cut) std::cout << ' ' << occ.label(q);
    std::cout << "\n  run:";
    for (auto t : w.run) std::cout << ' ' << occ.label(t);
    std::cout << '\n';
    if (w.refused) std::cout << "  refused: " << bp.base().label(*w.refused) << '\n';
    if (w.place) std::cout << "  place: " << occ.label(*w.place) << '\n';
    if (!w.transitions.empty()) {
      std::cout << "  choices:";
      for (auto t : w.transitions) std::cout << ' ' << occ.label(t);
      std::cout << '\n';
    }
  };
  line("justified_refusal", v.justified_refusal);
  line("safety", v.safety);
  line("determinism", v.determinism);
  line("deadlock_avoiding", v.deadlock_avoiding);
  for (const auto& e : v.frontier_errors) std::cout << "frontier: " << e << '\n';
  std::cout << (v.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"safe Petri games with causal memory"};
  app.require_subcommand(1);

  std::string game_path, strategy_path, out_path, dot_path, json_path, kind, instance_path;
  std::optional<std::size_t> bound, depth, max_transitions;
  std::optional<std::uint64_t> budget_ms;
  std::size_t expand_steps = 0;
  bool exact_bad = false, two_system = false, bad_place = false, json = false;

  auto* solve = app.add_subcommand("solve", "search for a winning strategy prefix");
  solve->add_option("game", game_path, "game file")->required();
  solve->add_option("--bound", bound, "largest candidate prefix, in transitions");
  solve->add_option("--budget-ms", budget_ms, "time budget (default $PGAME_BUDGET_MS or 60000)");
  solve->add_option("--out", out_path, "strategy output file (default stdout)");
  solve->add_option("--json", json_path, "synthesis report file");
  solve->add_option("--expand", expand_steps, "cut-and-glue steps applied to the result");

  auto* verify = app.add_subcommand("verify", "check the four winning properties of a strategy");
  verify->add_option("game", game_path, "game file")->required();
  verify->add_option("strategy", strategy_path, "strategy file")->required();
  verify->add_flag("--exact-bad", exact_bad, "bad sets must equal a cut rather than be covered");
  verify->add_flag("--json", json, "print the report as JSON");

  auto* unfold = app.add_subcommand("unfold", "build a finite part of the unfolding");
  unfold->add_option("game", game_path, "game file")->required();
  auto* dep = unfold->add_option("--depth", depth, "causal depth");
  unfold->add_option("--max-transitions", max_transitions, "transition cap")->excludes(dep);
  unfold->add_option("--out", out_path, "branching-process output file (default stdout)");
  unfold->add_option("--dot", dot_path, "graph export file");

  auto* reduce = app.add_subcommand("reduce", "build a game from a problem instance");
  reduce->add_option("kind", kind, "sat3 or bcp")->required()->check(CLI::IsMember({"sat3", "bcp"}));
  reduce->add_option("instance", instance_path, "instance file")->required();
  reduce->add_option("--out", out_path, "game output file (default stdout)");
  reduce->add_flag("--two-system", two_system, "bcp: at most two checks through gate tokens");
  reduce->add_flag("--bad-place", bad_place, "bcp: a single bad place");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_input;
  }

  try {
    if (*solve) {
      pgame::Game g = load_game(game_path);
      pgame::SynthesisOptions opt;
      opt.bound = bound.value_or(default_bound);
      opt.budget.time = std::chrono::milliseconds(budget_ms ? *budget_ms : budget_from_env());
      pgame::SynthesisResult r = pgame::synthesize(g, opt);
      std::cerr << "nodes " << r.stats.nodes << ", leaves verified " << r.stats.leaves_verified
                << ", largest prefix " << r.stats.largest_prefix << ", " << r.stats.elapsed_ms << " ms\n";
      if (!json_path.empty()) pgame::write_file(json_path, pgame::synthesis_json(r));
      std::cerr << pgame::to_string(r.status) << '\n';
      if (r.status == pgame::SynthesisStatus::inconclusive) return exit_inconclusive;
      if (!r.found()) return exit_no;
      pgame::StrategyPrefix sp = expand_steps ? pgame::expand(*r.prefix, expand_steps) : *r.prefix;
      emit(out_path, pgame::emit_strategy(sp));
      return exit_ok;
    }
    if (*verify) {
      pgame::Game g = load_game(game_path);
      auto base = std::make_shared<const pgame::Net>(g.net);
      pgame::StrategyPrefix sp = pgame::parse_strategy(pgame::read_file(strategy_path), base);
      pgame::VerifyOptions opt;
      if (exact_bad) opt.bad = pgame::BadSemantics::exact;
      pgame::Verdict v = pgame::verify(g, sp, opt);
      if (json)
        std::cout << pgame::verdict_json(sp.bp, v);
      else
        print_verdict(sp.bp, v);
      return v.passed() ? exit_ok : exit_no;
    }
    if (*unfold) {
      pgame::Game g = load_game(game_path);
      pgame::UnfoldLimit lim;
      lim.max_depth = depth;
      lim.max_transitions = max_transitions;
      if (!depth && !max_transitions) throw pgame::input_error("one of --depth or --max-transitions is required");
      pgame::UnfoldResult u = pgame::unfold(g.net, lim);
      pgame::StrategyPrefix sp{u.bp, {}, u.horizon};
      emit(out_path, pgame::emit_strategy(sp));
      if (!dot_path.empty()) pgame::write_file(dot_path, pgame::to_dot(u.bp, g.owner));
      std::cerr << u.bp.place_count() << " places, " << u.bp.transition_count() << " transitions"
                << (u.complete ? ", complete" : "") << '\n';
      return exit_ok;
    }
    if (*reduce) {
      std::string text = pgame::read_file(instance_path);
      if (kind == "sat3") {
        pgame::Cnf3 f = pgame::parse_dimacs(text);
        std::vector<std::string> notes{"sat3: " + std::to_string(f.variables) + " variables, " +
                                       std::to_string(f.clauses.size()) + " clauses"};
        emit(out_path, pgame::emit_game(pgame::sat3_to_game(f), notes));
      } else {
        pgame::BcpOptions o;
        o.two_system_players = two_system;
        o.bad_place = bad_place;
        pgame::BcpGame b = pgame::bcp_to_game(pgame::parse_bcp(text), o);
        emit(out_path, pgame::emit_game(b.game, b.notes));
      }
      return exit_ok;
    }
  } catch (const pgame::input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const pgame::unsupported_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const pgame::overflow_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_inconclusive;
  }
  return exit_input;
}
