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

// Fixtures and independent oracles shared by the test suites.

#pragma once

#include <deque>
#include <random>

#include "pgame/pgame.hpp"

namespace testing_support {

using namespace pgame;

inline std::string data_path(const std::string& name) { return std::string(PGAME_TEST_DATA) + "/" + name; }

inline Game load_game(const std::string& name) { return parse_game(read_file(data_path(name))); }

inline StrategyPrefix load_strategy(const Game& g, const std::string& name) {
  return parse_strategy(read_file(data_path(name)), std::make_shared<const Net>(g.net));
}

inline Game door() { return load_game("door.game"); }

inline std::set<std::string> labels(const Net& n, const Marking& m) {
  std::set<std::string> s;
  for (PlaceId p : m) s.insert(n.label(p));
  return s;
}

inline Marking marking(const Net& n, std::initializer_list<const char*> ls) {
  std::vector<PlaceId> v;
  for (const char* l : ls) v.push_back(n.place(l));
  return Marking(v);
}

// ---------------------------------------------------------------------------
// reachability oracle: plain BFS on sorted label vectors

inline std::set<std::vector<std::size_t>> bfs_markings(const Net& n) {
  std::vector<std::size_t> init;
  for (std::size_t i = 0; i < n.place_count(); ++i)
    if (n.is_initial(PlaceId(i))) init.push_back(i);
  std::set<std::vector<std::size_t>> seen{init};
  std::deque<std::vector<std::size_t>> q{init};
  while (!q.empty()) {
    auto m = q.front();
    q.pop_front();
    for (std::size_t t = 0; t < n.transition_count(); ++t) {
      bool en = true;
      for (PlaceId p : n.pre(TransitionId(t)))
        if (!std::binary_search(m.begin(), m.end(), p.index())) en = false;
      if (!en) continue;
      std::vector<std::size_t> r;
      for (std::size_t x : m) {
        bool consumed = false;
        for (PlaceId p : n.pre(TransitionId(t)))
          if (p.index() == x) consumed = true;
        if (!consumed) r.push_back(x);
      }
      for (PlaceId p : n.post(TransitionId(t))) r.push_back(p.index());
      std::sort(r.begin(), r.end());
      if (seen.insert(r).second) q.push_back(r);
    }
  }
  return seen;
}

inline std::set<std::vector<std::size_t>> as_index_sets(const std::vector<Cut>& cs) {
  std::set<std::vector<std::size_t>> s;
  for (const Cut& c : cs) {
    std::vector<std::size_t> v;
    for (PlaceId p : c) v.push_back(p.index());
    s.insert(v);
  }
  return s;
}

// ---------------------------------------------------------------------------
// causal order oracle: transitive closure of the flow relation

struct OrderOracle {
  // nodes: places 0..P-1, transitions P..P+T-1
  std::size_t P, T;
  std::vector<std::vector<bool>> reach;  // reflexive-transitive closure
  const Net* net;

  explicit OrderOracle(const Net& n) : P(n.place_count()), T(n.transition_count()), net(&n) {
    std::size_t N = P + T;
    reach.assign(N, std::vector<bool>(N, false));
    std::vector<std::vector<std::size_t>> succ(N);
    for (std::size_t t = 0; t < T; ++t) {
      for (PlaceId p : n.pre(TransitionId(t))) succ[p.index()].push_back(P + t);
      for (PlaceId p : n.post(TransitionId(t))) succ[P + t].push_back(p.index());
    }
    for (std::size_t s = 0; s < N; ++s) {
      std::vector<std::size_t> st{s};
      reach[s][s] = true;
      while (!st.empty()) {
        auto x = st.back();
        st.pop_back();
        for (auto y : succ[x])
          if (!reach[s][y]) {
            reach[s][y] = true;
            st.push_back(y);
          }
      }
    }
  }
  std::size_t id(Node x) const {
    if (auto* p = std::get_if<PlaceId>(&x)) return p->index();
    return P + std::get<TransitionId>(x).index();
  }
  bool leq(Node x, Node y) const { return reach[id(x)][id(y)]; }
  // two distinct transitions sharing a pre place, below x and y respectively
  bool conflict(Node x, Node y) const {
    for (std::size_t a = 0; a < T; ++a)
      for (std::size_t b = 0; b < T; ++b) {
        if (a == b) continue;
        bool share = false;
        for (PlaceId p : net->pre(TransitionId(a)))
          for (PlaceId q : net->pre(TransitionId(b)))
            if (p == q) share = true;
        if (share && reach[P + a][id(x)] && reach[P + b][id(y)]) return true;
      }
    return false;
  }
  Relation classify(Node x, Node y) const {
    if (x == y) return Relation::equal;
    if (leq(x, y)) return Relation::causal_le;
    if (leq(y, x)) return Relation::causal_ge;
    if (conflict(x, y)) return Relation::conflict;
    return Relation::concurrent;
  }
};

// ---------------------------------------------------------------------------
// isomorphism oracle: exhaustive search over label-preserving bijections

inline bool brute_isomorphic(const BranchingProcess& a, const BranchingProcess& b) {
  if (a.place_count() != b.place_count() || a.transition_count() != b.transition_count()) return false;
  const Net& x = a.occ();
  const Net& y = b.occ();
  std::size_t P = a.place_count();
  std::vector<std::size_t> pm(P, SIZE_MAX);
  std::vector<bool> used(P, false);
  auto check = [&]() {
    // transitions must map presets and postsets onto each other
    std::vector<bool> tused(b.transition_count(), false);
    for (std::size_t t = 0; t < a.transition_count(); ++t) {
      std::vector<std::size_t> pre, post;
      for (PlaceId p : x.pre(TransitionId(t))) pre.push_back(pm[p.index()]);
      for (PlaceId p : x.post(TransitionId(t))) post.push_back(pm[p.index()]);
      std::sort(pre.begin(), pre.end());
      std::sort(post.begin(), post.end());
      bool found = false;
      for (std::size_t u = 0; u < b.transition_count() && !found; ++u) {
        if (tused[u] || a.image(TransitionId(t)) != b.image(TransitionId(u))) continue;
        std::vector<std::size_t> pre2, post2;
        for (PlaceId p : y.pre(TransitionId(u))) pre2.push_back(p.index());
        for (PlaceId p : y.post(TransitionId(u))) post2.push_back(p.index());
        std::sort(pre2.begin(), pre2.end());
        std::sort(post2.begin(), post2.end());
        if (pre == pre2 && post == post2) {
          tused[u] = true;
          found = true;
        }
      }
      if (!found) return false;
    }
    return true;
  };
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == P) return check();
    for (std::size_t j = 0; j < P; ++j) {
      if (used[j] || a.image(PlaceId(i)) != b.image(PlaceId(j)) ||
          x.is_initial(PlaceId(i)) != y.is_initial(PlaceId(j)))
        continue;
      used[j] = true;
      pm[i] = j;
      if (go(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return go(0);
}

// ---------------------------------------------------------------------------
// SAT oracle

inline bool truth_table_sat(const Cnf3& f) {
  for (std::uint64_t a = 0; a < (1ull << f.variables); ++a)
    if (satisfies(f, a)) return true;
  return false;
}

inline Cnf3 random_cnf(std::mt19937& rng, int max_vars, int max_clauses) {
  Cnf3 f;
  f.variables = std::uniform_int_distribution<int>(1, max_vars)(rng);
  int n = std::uniform_int_distribution<int>(1, max_clauses)(rng);
  std::uniform_int_distribution<int> var(1, f.variables), sign(0, 1);
  for (int i = 0; i < n; ++i) {
    std::array<int, 3> c{};
    for (int& l : c) l = sign(rng) ? var(rng) : -var(rng);
    f.clauses.push_back(c);
  }
  return f;
}

// ---------------------------------------------------------------------------
// random safe games: one cyclic state machine per player, with local moves
// and two-player synchronisations

struct RandomGameShape {
  int players = 2;
  int states = 3;        // places per player
  int transitions = 5;   // total
  double system_share = 0.5;
  int bad_sets = 1;
};

inline Game random_game(std::mt19937& rng, const RandomGameShape& s) {
  Game g;
  std::vector<std::vector<PlaceId>> pl(static_cast<std::size_t>(s.players));
  std::bernoulli_distribution sys(s.system_share);
  for (int a = 0; a < s.players; ++a)
    for (int j = 0; j < s.states; ++j)
      pl[a].push_back(g.add_place("q" + std::to_string(a) + "_" + std::to_string(j),
                                  sys(rng) ? Owner::system : Owner::environment, j == 0));
  std::uniform_int_distribution<int> who(0, s.players - 1), st(0, s.states - 1);
  std::set<std::pair<std::vector<PlaceId>, std::vector<PlaceId>>> seen;
  int made = 0, tries = 0;
  while (made < s.transitions && tries++ < 1000) {
    int a = who(rng);
    bool sync = s.players > 1 && std::bernoulli_distribution(0.35)(rng);
    std::vector<PlaceId> pre{pl[a][st(rng)]}, post{pl[a][st(rng)]};
    if (sync) {
      int b = who(rng);
      if (b == a) continue;
      pre.push_back(pl[b][st(rng)]);
      post.push_back(pl[b][st(rng)]);
    }
    auto key = std::make_pair(Marking(pre).vec(), Marking(post).vec());
    if (!seen.insert(key).second) continue;
    g.add_transition("t" + std::to_string(made), pre, post);
    ++made;
  }
  for (int k = 0; k < s.bad_sets && s.players > 1; ++k) {
    int a = who(rng), b = who(rng);
    if (a == b) continue;
    g.add_bad(Marking{pl[a][st(rng)], pl[b][st(rng)]});
  }
  return g;
}

// ---------------------------------------------------------------------------
// exhaustive candidate search: every commitment for every undecided place,
// no segment cutoffs; leaves are checked with verify

inline bool brute_force_winning(const Game& g, std::size_t bound, std::uint64_t& leaves) {
  std::map<std::uint32_t, std::vector<TransitionId>> sketch;
  KeyTable table;
  RealizeOptions ro;
  ro.max_transitions = bound;
  ro.stop_on_exceed = true;
  CommitmentFn fn = [&](const BranchingProcess&, PlaceId, std::uint32_t k) -> std::optional<std::vector<TransitionId>> {
    auto it = sketch.find(k);
    if (it == sketch.end()) return std::nullopt;
    return it->second;
  };
  std::function<bool()> go = [&]() -> bool {
    Realization r = realize(g, fn, ro, table);
    if (r.exceeded) return false;
    // deciding more places only adds events, so these failures are final
    if (check_safety(g, r.prefix.bp).outcome == Outcome::fail) return false;
    if (check_determinism(g, r.prefix.bp).outcome == Outcome::fail) return false;
    if (r.undecided.empty()) {
      ++leaves;
      return verify(g, r.prefix).passed();
    }
    PlaceId p = r.undecided.front();
    std::uint32_t key = r.place_key[p.index()];
    std::vector<TransitionId> ts(g.net.consumers(r.prefix.bp.image(p)).begin(),
                                 g.net.consumers(r.prefix.bp.image(p)).end());
    for (std::uint64_t mask = 0; mask < (1ull << ts.size()); ++mask) {
      std::vector<TransitionId> c;
      for (std::size_t i = 0; i < ts.size(); ++i)
        if (mask >> i & 1u) c.push_back(ts[i]);
      sketch[key] = c;
      if (go()) return true;
    }
    sketch.erase(key);
    return false;
  };
  return go();
}

}  // namespace testing_support
