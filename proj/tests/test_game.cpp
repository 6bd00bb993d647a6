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

#include <gtest/gtest.h>

#include "support.hpp"

using namespace pgame;
using namespace testing_support;

namespace {

// replays a witness run on the occurrence net
Marking replay(const BranchingProcess& bp, const std::vector<TransitionId>& run) {
  Marking m = bp.occ().initial();
  for (TransitionId t : run) m = fire(bp.occ(), m, t);
  return m;
}

StrategyPrefix unfolded(const Game& g, std::size_t depth) {
  UnfoldResult u = unfold(g.net, UnfoldLimit{{}, depth});
  return {u.bp, {}, u.horizon};
}

// door prefix where both environment players request and both system
// players refuse
StrategyPrefix deny_all(const Game& g) {
  BranchingProcess bp(std::make_shared<const Net>(g.net));
  std::map<std::string, PlaceId> at;
  for (std::size_t i = 0; i < g.net.place_count(); ++i)
    if (g.net.is_initial(PlaceId(i))) at[g.net.label(PlaceId(i))] = bp.add_initial(PlaceId(i));
  TransitionId a = bp.add_event(g.net.transition("p1"), {at["C1"]});
  TransitionId b = bp.add_event(g.net.transition("p2"), {at["C2"]});
  (void)a;
  (void)b;
  return {bp, {}, {}};
}

TEST(ValidateGame, DoorIsValid) { EXPECT_TRUE(validate_game(door()).ok()); }

TEST(ValidateGame, PartitionMustCoverPlaces) {
  Game g = door();
  g.owner.pop_back();
  EXPECT_TRUE(validate_game(g).has("partition does not cover the places"));
}

TEST(ValidateGame, EmptyBadSet) {
  Game g = door();
  g.bad.push_back(Marking{});
  EXPECT_TRUE(validate_game(g).has("empty bad set"));
}

TEST(ValidateGame, UnsafeGameWithWitness) {
  Game g;
  PlaceId a = g.add_place("a", Owner::environment, true);
  PlaceId b = g.add_place("b", Owner::system, true);
  g.add_transition("u", {a}, {b});
  auto r = validate_game(g);
  ASSERT_TRUE(r.has("unsafe"));
  EXPECT_EQ(r.violations.front().nodes, (std::vector<std::string>{"u"}));
}

TEST(ValidateGame, StateCapReported) { EXPECT_TRUE(validate_game(door(), true, 5).has("state space exceeds cap")); }

TEST(PlayerCount, DoorHasFourTokens) { EXPECT_EQ(player_count(door()), 4u); }

TEST(Verify, SigmaPasses) {
  Game g = door();
  StrategyPrefix sp = load_strategy(g, "door_sigma.strat");
  Verdict v = verify(g, sp);
  EXPECT_TRUE(v.passed());
  EXPECT_EQ(v.safety.outcome, Outcome::pass);
  EXPECT_EQ(v.determinism.outcome, Outcome::pass);
  EXPECT_EQ(v.justified_refusal.outcome, Outcome::pass);
  EXPECT_NE(v.deadlock_avoiding.outcome, Outcome::fail);
}

TEST(Verify, FullUnfoldingIsNotDeterministic) {
  Game g = door();
  StrategyPrefix sp = unfolded(g, 4);
  Verdict v = verify(g, sp);
  EXPECT_FALSE(v.passed());
  ASSERT_EQ(v.determinism.outcome, Outcome::fail);
  const Witness& w = *v.determinism.witness;
  ASSERT_TRUE(w.place);
  EXPECT_TRUE(g.is_system(sp.bp.image(*w.place)));
  ASSERT_EQ(w.transitions.size(), 2u);
  EXPECT_EQ(replay(sp.bp, w.run), w.cut);
  for (TransitionId t : w.transitions) EXPECT_TRUE(w.cut.includes_all(sp.bp.occ().pre(t)));
}

TEST(Verify, FullUnfoldingRefusesNothing) {
  Game g = door();
  StrategyPrefix sp = unfolded(g, 4);
  EXPECT_EQ(verify(g, sp).justified_refusal.outcome, Outcome::pass);
}

TEST(Verify, BadMarkingReached) {
  Game g = door();
  StrategyPrefix sp = unfolded(g, 8);
  auto s = check_safety(g, sp.bp);
  ASSERT_EQ(s.outcome, Outcome::fail);
  ASSERT_TRUE(s.witness->bad);
  EXPECT_EQ(labels(g.net, *s.witness->bad), (std::set<std::string>{"O1", "O2"}));
  EXPECT_EQ(replay(sp.bp, s.witness->run), s.witness->cut);
  EXPECT_TRUE(sp.bp.image(s.witness->cut).includes(*s.witness->bad));
}

TEST(Verify, ExactBadSemanticsIgnoresCoveringCuts) {
  Game g = door();
  StrategyPrefix sp = unfolded(g, 8);
  EXPECT_EQ(check_safety(g, sp.bp, BadSemantics::exact).outcome, Outcome::pass);
}

TEST(Verify, EmptyBadFamilyIsAlwaysSafe) {
  Game g = load_game("selfloop.game");
  ASSERT_TRUE(g.bad.empty());
  StrategyPrefix sp = unfolded(g, 3);
  EXPECT_EQ(check_safety(g, sp.bp).outcome, Outcome::pass);
}

TEST(Verify, InitialCutAloneRefusesEnvironment) {
  Game g = door();
  StrategyPrefix sp = unfolded(g, 0);
  sp.horizon.clear();
  Verdict v = verify(g, sp);
  ASSERT_EQ(v.justified_refusal.outcome, Outcome::fail);
  std::string refused = g.net.label(*v.justified_refusal.witness->refused);
  EXPECT_TRUE(refused == "p1" || refused == "p2");
}

TEST(Verify, DenyAllDeadlocks) {
  Game g = door();
  StrategyPrefix sp = deny_all(g);
  Verdict v = verify(g, sp);
  EXPECT_EQ(v.justified_refusal.outcome, Outcome::pass);
  EXPECT_EQ(v.safety.outcome, Outcome::pass);
  EXPECT_EQ(v.determinism.outcome, Outcome::pass);
  ASSERT_EQ(v.deadlock_avoiding.outcome, Outcome::fail);
  EXPECT_EQ(labels(g.net, sp.bp.image(v.deadlock_avoiding.witness->cut)),
            (std::set<std::string>{"P1", "S11", "P2", "S21"}));
  EXPECT_FALSE(v.passed());
}

TEST(Verify, HorizonDefersDeadlock) {
  Game g = door();
  StrategyPrefix sp = deny_all(g);
  for (std::size_t i = 0; i < sp.bp.place_count(); ++i)
    if (sp.bp.occ().consumers(PlaceId(i)).empty()) sp.horizon.push_back(PlaceId(i));
  Verdict v = verify(g, sp);
  EXPECT_EQ(v.deadlock_avoiding.outcome, Outcome::deferred);
  EXPECT_FALSE(v.deadlock_avoiding.deferred.empty());
  EXPECT_TRUE(v.passed());
}

TEST(Verify, UnknownHorizonPlaceThrows) {
  Game g = door();
  StrategyPrefix sp = deny_all(g);
  sp.horizon.push_back(PlaceId(999));
  EXPECT_THROW(verify(g, sp), input_error);
}

TEST(Verify, WrongBaseThrows) {
  Game g = door();
  Game f = load_game("selfloop.game");
  StrategyPrefix sp = unfolded(f, 2);
  EXPECT_THROW(verify(g, sp), input_error);
  EXPECT_THROW(check_safety(g, sp.bp), input_error);
}

TEST(Verify, MalformedProcessThrows) {
  Game g = door();
  StrategyPrefix sp = deny_all(g);
  // a second producer for an existing place
  PlaceId p1 = sp.bp.occ().post(TransitionId(0))[0];
  PlaceId s11;
  for (std::size_t i = 0; i < sp.bp.place_count(); ++i)
    if (sp.bp.occ().label(PlaceId(i)) == "S11_1") s11 = PlaceId(i);
  sp.bp.add_transition(g.net.transition("n1"), "", {s11}, {p1});
  EXPECT_THROW(verify(g, sp), input_error);
}

TEST(Frontier, DenySecondLoopEntryIsSound) {
  Game g = door();
  StrategyPrefix sp = load_strategy(g, "deny_second.strat");
  const Net& occ = sp.bp.occ();
  sp.frontier.push_back({occ.transition("r2_2"), occ.transition("r2_1"), ImitationKind::prc});
  Verdict v = verify(g, sp);
  EXPECT_TRUE(v.frontier_errors.empty());
}

TEST(Frontier, TargetMustPrecedeCutoff) {
  Game g = door();
  StrategyPrefix sp = load_strategy(g, "deny_second.strat");
  const Net& occ = sp.bp.occ();
  sp.frontier.push_back({occ.transition("r2_1"), occ.transition("r2_2"), ImitationKind::prc});
  Verdict v = verify(g, sp);
  ASSERT_FALSE(v.frontier_errors.empty());
  EXPECT_NE(v.frontier_errors[0].find("target does not precede cutoff"), std::string::npos);
  EXPECT_FALSE(v.passed());
}

TEST(Frontier, NotAPrcLoop) {
  Game g = door();
  StrategyPrefix sp = load_strategy(g, "deny_second.strat");
  const Net& occ = sp.bp.occ();
  sp.frontier.push_back({occ.transition("d2_1"), occ.transition("p2_1"), ImitationKind::prc});
  Verdict v = verify(g, sp);
  ASSERT_EQ(v.frontier_errors.size(), 1u);
  EXPECT_NE(v.frontier_errors[0].find("not a prc loop"), std::string::npos);
}

TEST(Frontier, PrefixContinuesPastPrcCutoff) {
  Game g = door();
  StrategyPrefix sp = load_strategy(g, "deny_second.strat");
  const Net& occ = sp.bp.occ();
  TransitionId r22 = occ.transition("r2_2");
  sp.bp.add_event(g.net.transition("n2"), {occ.post(r22)[1]});
  sp.frontier.push_back({r22, occ.transition("r2_1"), ImitationKind::prc});
  Verdict v = verify(g, sp);
  ASSERT_EQ(v.frontier_errors.size(), 1u);
  EXPECT_NE(v.frontier_errors[0].find("continues past a prc cutoff"), std::string::npos);
}

TEST(Frontier, UnknownTransitions) {
  Game g = door();
  StrategyPrefix sp = load_strategy(g, "deny_second.strat");
  sp.frontier.push_back({TransitionId(500), TransitionId(0), ImitationKind::sqc});
  Verdict v = verify(g, sp);
  ASSERT_EQ(v.frontier_errors.size(), 1u);
  EXPECT_NE(v.frontier_errors[0].find("unknown transitions"), std::string::npos);
}

TEST(Frontier, SegmentMarkingsMustAgree) {
  Game g = door();
  StrategyPrefix sp = load_strategy(g, "deny_second.strat");
  const Net& occ = sp.bp.occ();
  sp.frontier.push_back({occ.transition("d2_1"), occ.transition("p2_1"), ImitationKind::sqc});
  Verdict v = verify(g, sp);
  ASSERT_EQ(v.frontier_errors.size(), 1u);
  EXPECT_NE(v.frontier_errors[0].find("last known markings differ"), std::string::npos);
}

TEST(Frontier, CutoffFutureIsDeferred) {
  Game g = door();
  SynthesisResult r = synthesize(g, 60);
  ASSERT_TRUE(r.found());
  Verdict v = verify(g, *r.prefix);
  EXPECT_TRUE(v.frontier_errors.empty());
  EXPECT_EQ(v.deadlock_avoiding.outcome, Outcome::deferred);
  EXPECT_TRUE(v.passed());
}

TEST(Verify, RandomGamesWitnessesReplay) {
  std::mt19937 rng(11);
  int failures = 0;
  for (int i = 0; i < 30; ++i) {
    RandomGameShape s;
    s.transitions = 4 + i % 4;
    Game g = random_game(rng, s);
    StrategyPrefix sp = unfolded(g, 3);
    Verdict v = verify(g, sp);
    for (auto* p : {&v.safety, &v.determinism, &v.deadlock_avoiding, &v.justified_refusal}) {
      if (p->outcome != Outcome::fail) continue;
      ++failures;
      ASSERT_TRUE(p->witness);
      if (p != &v.justified_refusal) {
        EXPECT_EQ(replay(sp.bp, p->witness->run), p->witness->cut);
      }
    }
    // a full unfolding never refuses
    EXPECT_NE(v.justified_refusal.outcome, Outcome::fail);
  }
  EXPECT_GT(failures, 0);
}

}  // namespace
