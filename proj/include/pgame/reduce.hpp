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

#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "pgame/game.hpp"

namespace pgame {

// ---------------------------------------------------------------------------
// 3-SAT

struct Cnf3 {
  int variables = 0;
  std::vector<std::array<int, 3>> clauses;  // signed variable indices
};

inline void validate(const Cnf3& f) {
  if (f.variables < 0) throw input_error("negative variable count");
  for (const auto& c : f.clauses)
    for (int l : c)
      if (l == 0 || std::abs(l) > f.variables) throw input_error("malformed clause: literal out of range");
}

inline bool satisfies(const Cnf3& f, std::uint64_t assignment) {
  for (const auto& c : f.clauses) {
    bool sat = false;
    for (int l : c) {
      bool v = (assignment >> (std::abs(l) - 1)) & 1u;
      if ((l > 0) == v) sat = true;
    }
    if (!sat) return false;
  }
  return true;
}

// Two chains of system places. The top one picks a value for each variable in
// turn (a_{k-1} -> x_k | nx_k -> a_k); the bottom one picks one literal per
// clause (b_{i-1} -> l_{i.j} -> b_i). A literal place together with the place
// of the opposite value is bad.
inline Game sat3_to_game(const Cnf3& f) {
  validate(f);
  Game g;
  int m = f.variables;
  auto n = static_cast<int>(f.clauses.size());
  std::vector<PlaceId> a, x, nx, b;
  for (int k = 0; k <= m; ++k) {
    a.push_back(g.add_place("a" + std::to_string(k), Owner::system, k == 0));
    if (k == m) break;
    x.push_back(g.add_place("x" + std::to_string(k + 1), Owner::system));
    nx.push_back(g.add_place("nx" + std::to_string(k + 1), Owner::system));
  }
  std::vector<std::array<PlaceId, 3>> lit(static_cast<std::size_t>(n));
  for (int i = 0; i <= n; ++i) {
    b.push_back(g.add_place("b" + std::to_string(i), Owner::system, i == 0));
    if (i == n) break;
    for (int j = 0; j < 3; ++j)
      lit[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g.add_place(
          "l" + std::to_string(i + 1) + "." + std::to_string(j + 1), Owner::system);
  }
  for (int k = 0; k < m; ++k) {
    std::string v = std::to_string(k + 1);
    auto uk = static_cast<std::size_t>(k);
    g.add_transition("set_x" + v, {a[uk]}, {x[uk]});
    g.add_transition("set_nx" + v, {a[uk]}, {nx[uk]});
    g.add_transition("next_x" + v, {x[uk]}, {a[uk + 1]});
    g.add_transition("next_nx" + v, {nx[uk]}, {a[uk + 1]});
  }
  for (int i = 0; i < n; ++i) {
    auto ui = static_cast<std::size_t>(i);
    for (int j = 0; j < 3; ++j) {
      auto uj = static_cast<std::size_t>(j);
      std::string s = std::to_string(i + 1) + "." + std::to_string(j + 1);
      g.add_transition("pick" + s, {b[ui]}, {lit[ui][uj]});
      g.add_transition("done" + s, {lit[ui][uj]}, {b[ui + 1]});
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) {
      int l = f.clauses[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      auto k = static_cast<std::size_t>(std::abs(l) - 1);
      PlaceId lp = lit[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      g.add_bad(Marking{l > 0 ? nx[k] : x[k], lp});
    }
  return g;
}

// ---------------------------------------------------------------------------
// round arithmetic

enum class RoundRelation { same, ahead, behind, impossible };

inline const char* to_string(RoundRelation r) {
  switch (r) {
    case RoundRelation::same: return "same";
    case RoundRelation::ahead: return "ahead";
    case RoundRelation::behind: return "behind";
    case RoundRelation::impossible: return "impossible";
  }
  return "?";
}

// relation of player a at index j to player b at index k of the same part
inline RoundRelation compare_rounds(int j, int k) {
  if (j < 0 || j > 5 || k < 0 || k > 5) throw input_error("round index out of range");
  auto in = [&](std::initializer_list<int> s) {
    return std::find(s.begin(), s.end(), j) != s.end() && std::find(s.begin(), s.end(), k) != s.end();
  };
  if (in({0, 1, 2}) || in({3, 4}) || in({5, 2})) return RoundRelation::same;
  if ((j == 3 && k == 2) || (j == 5 && k == 4)) return RoundRelation::ahead;
  if ((k == 3 && j == 2) || (k == 5 && j == 4)) return RoundRelation::behind;
  return RoundRelation::impossible;
}

enum class Part { top, bottom };

inline const char* part_prefix(Part x) { return x == Part::top ? "T_" : "B_"; }

// max(ceil(n / 3), 1) where n counts round transitions of the part below p;
// round transitions are recognised by the label prefix T_ or B_
inline std::size_t round_count(const BranchingProcess& bp, PlaceId p, Part part) {
  if (!bp.occ().has(p)) throw input_error("unknown place");
  Causality cz(bp);
  std::size_t n = 0;
  std::string pre = part_prefix(part);
  cz.past(p).for_each([&](std::size_t i) {
    if (bp.base().label(bp.image(TransitionId(i))).rfind(pre, 0) == 0) ++n;
  });
  return std::max<std::size_t>((n + 2) / 3, 1);
}

// ---------------------------------------------------------------------------
// ω-BCP

struct BcpInstance {
  std::vector<std::string> colours;
  std::vector<std::string> initial;
  std::vector<std::pair<std::string, std::string>> dp, hp, vp;
};

inline void validate(const BcpInstance& in) {
  if (in.colours.empty()) throw input_error("empty colour set");
  auto known = [&](const std::string& c) { return std::find(in.colours.begin(), in.colours.end(), c) != in.colours.end(); };
  std::set<std::string> seen;
  for (auto& c : in.colours) {
    if (c.empty() || c.find_first_of(" \t,()") != std::string::npos) throw input_error("bad colour name '" + c + "'");
    if (!seen.insert(c).second) throw input_error("duplicate colour '" + c + "'");
  }
  for (auto& c : in.initial)
    if (!known(c)) throw input_error("initial colour '" + c + "' is not a colour");
  for (auto* s : {&in.dp, &in.hp, &in.vp})
    for (auto& [u, v] : *s)
      if (!known(u) || !known(v)) throw input_error("pattern refers to an unknown colour");
}

struct BcpOptions {
  // at most two checks: two environment gate tokens, one consumed per check
  bool two_system_players = false;
  // replace the bad sets by one bad place reached through a transition per set
  bool bad_place = false;
};

struct BcpGame {
  Game game;
  // generator notes: index wiring and reading choices
  std::vector<std::string> notes;
};

namespace detail {
inline std::string bcp_place(const char* part, int a, int j) {
  return std::string(part) + std::to_string(a) + std::to_string(j);
}
inline std::string check_name(int a, int j, int k) {
  return std::to_string(a) + std::to_string(j) + "-" + std::to_string(a) + std::to_string(k);
}
}  // namespace detail

// Two parts of three environment players. Per part, each block of three
// synchronisations (0,1), (1,2), (2,0) is a round: player indices move
// 0->1->2 in the first round, 2->3->4 in the second and 4->5->2 in the third.
// A check t_{aj-ak} takes e^T_{aj} and e^B_{ak} to the record place
// e_{aj-ak} and the system place s_a, which chooses a colour (c,a).
inline BcpGame bcp_to_game(const BcpInstance& in, const BcpOptions& opt = {}) {
  validate(in);
  BcpGame out;
  Game& g = out.game;
  const char* parts[2] = {"eT", "eB"};
  const char* tags[2] = {"T_", "B_"};
  PlaceId e[2][3][6];
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 3; ++a)
      for (int j = 0; j < 6; ++j) e[x][a][j] = g.add_place(detail::bcp_place(parts[x], a, j), Owner::environment, j == 0);
  // round r uses index steps: first sync moves a player from i to i+1, second from i+1 to i+2
  struct Step { int from, mid, to; };
  const Step steps[3] = {{0, 1, 2}, {2, 3, 4}, {4, 5, 2}};
  for (int x = 0; x < 2; ++x)
    for (int r = 0; r < 3; ++r) {
      const Step& s = steps[r];
      std::string base = std::string(tags[x]) + "r" + std::to_string(r + 1);
      // (0,1): both first moves; (1,2): second of 1, first of 2; (2,0): second of 2 and 0
      g.add_transition(base + "_s01", {e[x][0][s.from], e[x][1][s.from]}, {e[x][0][s.mid], e[x][1][s.mid]});
      g.add_transition(base + "_s12", {e[x][1][s.mid], e[x][2][s.from]}, {e[x][1][s.to], e[x][2][s.mid]});
      g.add_transition(base + "_s20", {e[x][2][s.mid], e[x][0][s.mid]}, {e[x][2][s.to], e[x][0][s.to]});
    }
  std::vector<PlaceId> sys(3);
  for (int a = 0; a < 3; ++a) sys[a] = g.add_place("s_" + std::to_string(a), Owner::system);
  std::vector<PlaceId> gates;
  if (opt.two_system_players)
    for (int i = 1; i <= 2; ++i) gates.push_back(g.add_place("gate" + std::to_string(i), Owner::environment, true));
  PlaceId rec[3][6][6];
  for (int a = 0; a < 3; ++a)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) {
        rec[a][j][k] = g.add_place("e_" + detail::check_name(a, j, k), Owner::environment);
        std::vector<PlaceId> pre{e[0][a][j], e[1][a][k]};
        std::vector<PlaceId> post{rec[a][j][k], sys[a]};
        std::string name = "t_" + detail::check_name(a, j, k);
        if (gates.empty()) {
          g.add_transition(name, pre, post);
        } else {
          for (std::size_t gi = 0; gi < gates.size(); ++gi) {
            auto p2 = pre;
            p2.push_back(gates[gi]);
            g.add_transition(name + "_g" + std::to_string(gi + 1), p2, post);
          }
        }
      }
  std::map<std::string, std::vector<PlaceId>> colour;
  for (auto& c : in.colours)
    for (int a = 0; a < 3; ++a) colour[c].push_back(g.add_place("(" + c + "," + std::to_string(a) + ")", Owner::system));
  for (int a = 0; a < 3; ++a)
    for (auto& c : in.colours)
      g.add_transition("t_" + std::to_string(a) + "_" + c, {sys[a]}, {colour[c][static_cast<std::size_t>(a)]});

  // bad sets
  std::vector<Marking> bad;
  auto has = [](const std::vector<std::pair<std::string, std::string>>& s, const std::string& u,
                const std::string& v) { return std::find(s.begin(), s.end(), std::make_pair(u, v)) != s.end(); };
  std::size_t n_same = 0, n_dp = 0, n_vp = 0, n_hp = 0, n_init = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      for (int j = 0; j < 6; ++j)
        for (int jb = 0; jb < 6; ++jb)
          for (int k = 0; k < 6; ++k)
            for (int kb = 0; kb < 6; ++kb) {
              RoundRelation top = compare_rounds(j, k), bottom = compare_rounds(jb, kb);
              for (auto& cu : in.colours)
                for (auto& cv : in.colours) {
                  Marking m{rec[a][j][jb], rec[b][k][kb], colour[cu][static_cast<std::size_t>(a)],
                            colour[cv][static_cast<std::size_t>(b)]};
                  bool same = a < b && top == RoundRelation::same && bottom == RoundRelation::same && cu != cv;
                  bool dp = top == RoundRelation::ahead && bottom == RoundRelation::ahead && has(in.dp, cv, cu);
                  bool vp = top == RoundRelation::ahead && bottom == RoundRelation::same && has(in.vp, cv, cu);
                  bool hp = bottom == RoundRelation::ahead && top == RoundRelation::same && has(in.hp, cv, cu);
                  if (same) ++n_same;
                  if (dp) ++n_dp;
                  if (vp) ++n_vp;
                  if (hp) ++n_hp;
                  if (same || dp || vp || hp) bad.push_back(std::move(m));
                }
            }
    }
  for (int a = 0; a < 3; ++a)
    for (int j = 0; j < 2; ++j)
      for (int jb = 0; jb < 2; ++jb)
        for (auto& cu : in.colours)
          if (std::find(in.initial.begin(), in.initial.end(), cu) == in.initial.end()) {
            bad.push_back(Marking{rec[a][j][jb], colour[cu][static_cast<std::size_t>(a)]});
            ++n_init;
          }
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());

  if (opt.bad_place) {
    PlaceId ok = g.add_place("not_bad", Owner::environment, true);
    PlaceId bp = g.add_place("bad_reached", Owner::environment);
    for (std::size_t i = 0; i < bad.size(); ++i) {
      std::vector<PlaceId> pre(bad[i].begin(), bad[i].end());
      pre.push_back(ok);
      g.add_transition("reach_bad" + std::to_string(i + 1), pre, {bp});
    }
    g.bad = {Marking{bp}};
  } else {
    g.bad = std::move(bad);
  }

  auto& notes = out.notes;
  notes.push_back("part players: eT<a><j> and eB<a><j>, player a in {0,1,2}, index j in 0..5");
  notes.push_back("round 1 moves indices 0->1->2, round 2 moves 2->3->4, round 3 moves 4->5->2");
  notes.push_back("syncs per round in causal order: (0,1), (1,2), (2,0)");
  notes.push_back("B_HP uses a^T and b^T in the same round");
  notes.push_back("pattern pairs are read as (colour of the player behind, colour of the player ahead)");
  notes.push_back("bad sets: same " + std::to_string(n_same) + ", diagonal " + std::to_string(n_dp) + ", vertical " +
                  std::to_string(n_vp) + ", horizontal " + std::to_string(n_hp) + ", initial " +
                  std::to_string(n_init));
  if (opt.two_system_players) notes.push_back("checks consume one of two gate tokens");
  if (opt.bad_place)
    notes.push_back("bad sets replaced by place 'bad_reached'; its transitions consume system places and can be refused");
  return out;
}

}  // namespace pgame
