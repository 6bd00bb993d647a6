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

#include "pgame/loops.hpp"
#include "pgame/unfold.hpp"

namespace pgame {

enum class Owner : std::uint8_t { environment, system };

// Safe Petri game: a net, a partition of its places and a family of bad
// place sets.
struct Game {
  Net net;
  std::vector<Owner> owner;
  std::vector<Marking> bad;

  PlaceId add_place(std::string label, Owner o, bool initial = false) {
    owner.push_back(o);
    return net.add_place(std::move(label), initial);
  }
  TransitionId add_transition(std::string label, std::vector<PlaceId> pre, std::vector<PlaceId> post) {
    return net.add_transition(std::move(label), std::move(pre), std::move(post));
  }
  void add_bad(Marking m) {
    if (std::find(bad.begin(), bad.end(), m) == bad.end()) bad.push_back(std::move(m));
  }

  bool is_system(PlaceId p) const { return owner.at(p.index()) == Owner::system; }

  friend bool operator==(const Game& a, const Game& b) {
    auto sa = a.bad, sb = b.bad;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return a.net == b.net && a.owner == b.owner && sa == sb;
  }
};

inline ValidationReport validate_game(const Game& g, bool check_safe = true, std::size_t cap = default_state_cap) {
  ValidationReport r = validate_net(g.net);
  if (g.owner.size() != g.net.place_count()) r.add("partition does not cover the places");
  for (const auto& b : g.bad) {
    if (b.empty()) r.add("empty bad set");
    for (PlaceId p : b)
      if (!g.net.has(p)) r.add("bad set refers to an unknown place");
  }
  if (check_safe) {
    try {
      reachable_markings(g.net, cap);
    } catch (const safety_error& e) {
      std::vector<std::string> seq;
      for (TransitionId t : e.witness) seq.push_back(g.net.label(t));
      r.add("unsafe", seq);
    } catch (const overflow_error&) {
      r.add("state space exceeds cap");
    }
  }
  return r;
}

// number of players: largest reachable token count
inline std::size_t player_count(const Game& g, std::size_t cap = default_state_cap) {
  return max_tokens(g.net, cap);
}

// ---------------------------------------------------------------------------
// strategy prefixes

enum class ImitationKind { prc, sqc };

inline const char* to_string(ImitationKind k) { return k == ImitationKind::prc ? "prc" : "sqc"; }

// Continuing after cutoff behaves like continuing after target.
struct FrontierEntry {
  TransitionId cutoff;
  TransitionId target;
  ImitationKind kind = ImitationKind::prc;
  friend auto operator<=>(const FrontierEntry&, const FrontierEntry&) = default;
};

// A finite strategy prefix. The frontier states how to continue past its
// cutoffs; horizon places mark where an explored region was cut off
// without any claim.
struct StrategyPrefix {
  BranchingProcess bp;
  std::vector<FrontierEntry> frontier;
  std::vector<PlaceId> horizon;
};

// ---------------------------------------------------------------------------
// verdicts

enum class Outcome { pass, fail, deferred };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::deferred: return "deferred";
  }
  return "?";
}

struct Witness {
  std::string reason;
  Cut cut;                                // offending cut, or co-set for refusals
  std::vector<TransitionId> run;          // occurrence-net firing sequence reaching cut
  std::optional<TransitionId> refused;    // base transition without instance
  std::optional<PlaceId> place;           // system place with two enabled choices
  std::vector<TransitionId> transitions;  // the two choices
  std::optional<Marking> bad;             // bad set covered by the cut
};

struct PropertyVerdict {
  Outcome outcome = Outcome::pass;
  std::optional<Witness> witness;
  std::vector<Cut> deferred;
};

struct Verdict {
  PropertyVerdict justified_refusal, safety, determinism, deadlock_avoiding;
  std::vector<std::string> frontier_errors;

  bool passed() const {
    for (auto* p : {&justified_refusal, &safety, &determinism, &deadlock_avoiding})
      if (p->outcome == Outcome::fail) return false;
    return frontier_errors.empty();
  }
};

enum class BadSemantics { covering, exact };

namespace detail {

inline std::vector<TransitionId> run_to(const Causality& cz, const Marking& coset) {
  return linearize(cz, configuration(cz, coset));
}

inline Witness make_witness(const Causality& cz, std::string reason, const Cut& c) {
  Witness w;
  w.reason = std::move(reason);
  w.cut = c;
  w.run = run_to(cz, c);
  return w;
}

inline std::vector<TransitionId> enabled_at(const Net& occ, const Cut& m) {
  std::set<TransitionId> s;
  for (PlaceId p : m)
    for (TransitionId t : occ.consumers(p))
      if (m.includes_all(occ.pre(t))) s.insert(t);
  return {s.begin(), s.end()};
}

inline void require_base(const Game& g, const BranchingProcess& bp) {
  if (!(bp.base() == g.net)) throw input_error("strategy is not a process of the game's net");
}

}  // namespace detail

// Every missing extension (t, C) must be refused by a system place of C
// whose post images exclude t. Co-sets meeting `skip` are not inspected.
inline PropertyVerdict check_justified_refusal(const Game& g, const BranchingProcess& bp, const Causality& cz,
                                               const Bitset& skip = {}) {
  PropertyVerdict v;
  const Net& occ = bp.occ();
  auto inst = detail::instances_by_image(bp);
  auto have = detail::event_index(bp);
  for (std::size_t i = 0; i < g.net.transition_count() && !v.witness; ++i) {
    TransitionId t(i);
    std::vector<std::vector<PlaceId>> slots;
    for (PlaceId b : g.net.pre(t)) slots.push_back(inst[b.index()]);
    detail::for_each_coset(
        cz, slots, [&](PlaceId p, std::size_t) { return !skip.test(p.index()); },
        [&](const std::vector<PlaceId>& c) {
          std::vector<PlaceId> s = c;
          std::sort(s.begin(), s.end());
          if (have.count({t, s})) return true;
          for (PlaceId p : s) {
            if (!g.is_system(bp.image(p))) continue;
            bool offered = false;
            for (TransitionId u : occ.consumers(p))
              if (bp.image(u) == t) offered = true;
            if (!offered) return true;
          }
          v.outcome = Outcome::fail;
          Witness w = detail::make_witness(cz, "unjustified refusal of " + g.net.label(t), Cut(s));
          w.refused = t;
          v.witness = std::move(w);
          return false;
        });
  }
  return v;
}

inline PropertyVerdict check_justified_refusal(const Game& g, const BranchingProcess& bp) {
  detail::require_base(g, bp);
  return check_justified_refusal(g, bp, Causality(bp));
}

inline PropertyVerdict check_safety(const Game& g, const BranchingProcess& bp, const std::vector<Cut>& all,
                                    const Causality& cz, BadSemantics sem = BadSemantics::covering) {
  PropertyVerdict v;
  for (const Cut& c : all) {
    Marking m = bp.image(c);
    for (const Marking& b : g.bad) {
      bool hit = sem == BadSemantics::covering ? m.includes(b) : m == b;
      if (!hit) continue;
      v.outcome = Outcome::fail;
      Witness w = detail::make_witness(cz, "cut reaches a bad marking", c);
      w.bad = b;
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

inline PropertyVerdict check_safety(const Game& g, const BranchingProcess& bp,
                                    BadSemantics sem = BadSemantics::covering, std::size_t cap = default_cut_cap) {
  detail::require_base(g, bp);
  Causality cz(bp);
  return check_safety(g, bp, cuts(bp, cz, cap), cz, sem);
}

inline PropertyVerdict check_determinism(const Game& g, const BranchingProcess& bp, const std::vector<Cut>& all,
                                         const Causality& cz) {
  PropertyVerdict v;
  const Net& occ = bp.occ();
  for (const Cut& c : all) {
    for (PlaceId p : c) {
      if (!g.is_system(bp.image(p))) continue;
      std::vector<TransitionId> en;
      for (TransitionId t : occ.consumers(p))
        if (c.includes_all(occ.pre(t))) en.push_back(t);
      if (en.size() < 2) continue;
      v.outcome = Outcome::fail;
      Witness w = detail::make_witness(cz, "system place with two enabled choices", c);
      w.place = p;
      w.transitions = {en[0], en[1]};
      v.witness = std::move(w);
      return v;
    }
  }
  return v;
}

inline PropertyVerdict check_determinism(const Game& g, const BranchingProcess& bp,
                                         std::size_t cap = default_cut_cap) {
  detail::require_base(g, bp);
  Causality cz(bp);
  return check_determinism(g, bp, cuts(bp, cz, cap), cz);
}

// Cuts for which `deferred` holds are reported as deferred instead of checked.
inline PropertyVerdict check_deadlock_avoiding(const Game& g, const BranchingProcess& bp, const std::vector<Cut>& all,
                                               const Causality& cz,
                                               const std::function<bool(const Cut&)>& deferred = {}) {
  PropertyVerdict v;
  for (const Cut& c : all) {
    if (deferred && deferred(c)) {
      v.deferred.push_back(c);
      continue;
    }
    if (!detail::enabled_at(bp.occ(), c).empty()) continue;
    if (enabled(g.net, bp.image(c)).empty()) continue;
    v.outcome = Outcome::fail;
    v.witness = detail::make_witness(cz, "strategy stops while the game can continue", c);
    return v;
  }
  if (!v.deferred.empty()) v.outcome = Outcome::deferred;
  return v;
}

inline PropertyVerdict check_deadlock_avoiding(const Game& g, const BranchingProcess& bp,
                                               std::size_t cap = default_cut_cap) {
  detail::require_base(g, bp);
  Causality cz(bp);
  return check_deadlock_avoiding(g, bp, cuts(bp, cz, cap), cz);
}

// ---------------------------------------------------------------------------
// frontier checks

namespace detail {

// problems of a single frontier entry, empty if it is sound
inline std::string frontier_problem(const BranchingProcess& bp, const LoopIndex& li, const FrontierEntry& f) {
  const Causality& cz = li.causality();
  if (!bp.occ().has(f.cutoff) || !bp.occ().has(f.target)) return "frontier refers to unknown transitions";
  const std::string name = bp.occ().label(f.cutoff) + " -> " + bp.occ().label(f.target);
  if (!cz.less(f.target, f.cutoff)) return name + ": target does not precede cutoff";
  if (f.kind == ImitationKind::prc) {
    if (!li.prc_loop(f.target, f.cutoff)) return name + ": not a prc loop";
    for (PlaceId q : bp.occ().post(f.cutoff))
      if (!bp.occ().consumers(q).empty()) return name + ": prefix continues past a prc cutoff";
  } else {
    if (li.lkm(f.target) != li.lkm(f.cutoff)) return name + ": last known markings differ";
    Segment s = segment(li, f.cutoff);
    for (std::size_t i = 0; i < bp.transition_count(); ++i) {
      TransitionId u(i);
      if (u != f.cutoff && cz.leq(f.cutoff, u) && !s.nodes.has(u))
        return name + ": prefix continues past a segment cutoff";
    }
    if (!sqc_loop(li, f.target, f.cutoff)) return name + ": segments are not isomorphic";
  }
  return {};
}

}  // namespace detail

struct VerifyOptions {
  BadSemantics bad = BadSemantics::covering;
  std::size_t cut_cap = default_cut_cap;
};

// Checks the four winning conditions on a prefix. Cuts inside the future of
// a cutoff's last known cut, and cuts touching the horizon, are deferred to
// the imitation; refusal checks skip co-sets beyond cutoffs or on the horizon.
inline Verdict verify(const Game& g, const StrategyPrefix& sp, const VerifyOptions& opt = {}) {
  const BranchingProcess& bp = sp.bp;
  detail::require_base(g, bp);
  ValidationReport rep = validate_bp(bp);
  if (!rep.ok()) {
    std::string msg = "not a branching process:";
    for (auto& v : rep.violations) {
      msg += " " + v.rule;
      for (auto& n : v.nodes) msg += " " + n;
      msg += ";";
    }
    throw input_error(msg);
  }
  Causality cz(bp);
  LoopIndex li(bp, cz);
  Verdict v;

  std::vector<Bitset> fut_places;
  Bitset skip;
  for (PlaceId h : sp.horizon) {
    if (!bp.occ().has(h)) throw input_error("horizon refers to an unknown place");
    skip.set(h.index());
  }
  for (const FrontierEntry& f : sp.frontier) {
    std::string err = detail::frontier_problem(bp, li, f);
    if (!err.empty()) {
      v.frontier_errors.push_back(err);
      continue;
    }
    fut_places.push_back(future_nodes(bp, cz, li.lkc(f.cutoff)).places);
    for (std::size_t i = 0; i < bp.place_count(); ++i)
      if (cz.less(f.cutoff, PlaceId(i))) skip.set(i);
  }
  for (const FrontierEntry& f : sp.frontier)
    for (const FrontierEntry& o : sp.frontier)
      if (bp.occ().has(f.target) && bp.occ().has(o.cutoff) && cz.less(o.cutoff, f.target))
        v.frontier_errors.push_back("target " + bp.occ().label(f.target) + " lies beyond cutoff " +
                                    bp.occ().label(o.cutoff));

  auto all = cuts(bp, cz, opt.cut_cap);
  v.safety = check_safety(g, bp, all, cz, opt.bad);
  v.determinism = check_determinism(g, bp, all, cz);
  v.deadlock_avoiding = check_deadlock_avoiding(g, bp, all, cz, [&](const Cut& c) {
    for (PlaceId p : c)
      if (std::find(sp.horizon.begin(), sp.horizon.end(), p) != sp.horizon.end()) return true;
    for (const Bitset& fp : fut_places) {
      bool inside = true;
      for (PlaceId p : c)
        if (!fp.test(p.index())) { inside = false; break; }
      if (inside) return true;
    }
    return false;
  });
  v.justified_refusal = check_justified_refusal(g, bp, cz, skip);
  return v;
}

}  // namespace pgame
