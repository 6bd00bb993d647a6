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

#include <chrono>

#include "pgame/game.hpp"
#include "pgame/loops.hpp"

namespace pgame {

// ---------------------------------------------------------------------------
// prefix bound

struct PrefixBound {
  std::size_t players = 0;
  std::uint64_t size = 0;
  bool saturated = false;  // exact value exceeds 64 bits
};

namespace detail {
inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b, bool& sat) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    sat = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}
inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b, bool& sat) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) {
    sat = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a + b;
}
inline std::uint64_t sat_pow2(std::uint64_t e, bool& sat) {
  if (e >= 64) {
    sat = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return std::uint64_t{1} << e;
}
}  // namespace detail

// Size bound of a winning prefix for K players and T transitions: T for one
// player, T^2 for two, 2^((T^2+T)^2) for three and 2^(6T^2) for four.
inline PrefixBound prefix_bound(std::size_t players, std::uint64_t transitions) {
  PrefixBound b;
  b.players = players;
  bool sat = false;
  std::uint64_t t = transitions;
  switch (players) {
    case 0: b.size = 0; break;
    case 1: b.size = t; break;
    case 2: b.size = detail::sat_mul(t, t, sat); break;
    case 3: {
      std::uint64_t s = detail::sat_add(detail::sat_mul(t, t, sat), t, sat);
      b.size = detail::sat_pow2(detail::sat_mul(s, s, sat), sat);
      break;
    }
    case 4: b.size = detail::sat_pow2(detail::sat_mul(6, detail::sat_mul(t, t, sat), sat), sat); break;
    default: throw unsupported_error("prefix bound is only known for up to four players");
  }
  b.saturated = sat;
  return b;
}

inline PrefixBound prefix_bound(const Game& g, std::size_t cap = default_state_cap) {
  return prefix_bound(player_count(g, cap), g.net.transition_count());
}

// ---------------------------------------------------------------------------
// realizing commitments

// Allowed base transitions of a system place instance, or nullopt if the
// place is still undecided. key is the canonical key of the place.
using CommitmentFn =
    std::function<std::optional<std::vector<TransitionId>>(const BranchingProcess&, PlaceId, std::uint32_t key)>;

struct RealizeOptions {
  std::optional<std::size_t> max_transitions;
  std::optional<std::size_t> max_depth;
  bool prc_cutoffs = true;
  // abandon the construction as soon as max_transitions would be exceeded
  bool stop_on_exceed = false;
  // segment cutoffs: event key -> target event key
  std::map<std::uint32_t, std::uint32_t> sqc;
};

struct Realization {
  StrategyPrefix prefix;
  std::vector<PlaceId> undecided;
  std::vector<std::uint32_t> place_key, transition_key;
  bool exceeded = false;
};

namespace detail {

class Builder {
 public:
  Builder(const Game& g, const CommitmentFn& fn, const RealizeOptions& opt, KeyTable& table)
      : g_(g), fn_(fn), opt_(opt), table_(table), base_(std::make_shared<const Net>(g.net)), bp_(base_) {
    inst_all_.resize(g.net.place_count());
    inst_active_.resize(g.net.place_count());
  }

  Realization run() {
    for (PlaceId b : g_.net.initial()) {
      PlaceId p = bp_.add_initial(b);
      on_new_place(p, 0, table_.intern({0, b.value(), no_key}));
    }
    cz_ = Causality(bp_);
    for (std::size_t i = 0; i < bp_.place_count(); ++i) activate(PlaceId(i));
    while (!queue_.empty() && !abort_) {
      PlaceId p = queue_.front();
      queue_.pop_front();
      explore(p);
    }
    Realization r;
    r.exceeded = exceeded_;
    if (abort_) return r;
    return materialize(std::move(r));
  }

 private:
  enum State : std::uint8_t { undecided, active, frozen };

  void on_new_place(PlaceId p, std::size_t depth, std::uint32_t key) {
    state_.push_back(undecided);
    allowed_.emplace_back();
    pdepth_.push_back(depth);
    pkey_.push_back(key);
    inst_all_[bp_.image(p).index()].push_back(p);
  }

  void activate(PlaceId p) {
    PlaceId b = bp_.image(p);
    if (g_.is_system(b)) {
      std::vector<bool> mask(g_.net.transition_count(), false);
      if (!g_.net.consumers(b).empty()) {
        auto c = fn_(bp_, p, pkey_[p.index()]);
        if (!c) {
          undecided_.push_back(p);
          return;
        }
        for (TransitionId t : *c)
          if (t.index() < mask.size()) mask[t.index()] = true;
      }
      allowed_[p.index()] = std::move(mask);
    }
    state_[p.index()] = active;
    inst_active_[b.index()].push_back(p);
    queue_.push_back(p);
  }

  bool allows(PlaceId p, TransitionId t) const {
    if (state_[p.index()] != active) return false;
    const auto& a = allowed_[p.index()];
    return a.empty() ? !g_.is_system(bp_.image(p)) : a[t.index()];
  }

  void explore(PlaceId p) {
    PlaceId b = bp_.image(p);
    std::vector<TransitionId> ts(g_.net.consumers(b).begin(), g_.net.consumers(b).end());
    std::sort(ts.begin(), ts.end());
    for (TransitionId t : ts) {
      if (!allows(p, t)) continue;
      std::vector<std::vector<PlaceId>> slots;
      for (PlaceId x : g_.net.pre(t)) {
        if (x == b) slots.push_back({p});
        else slots.push_back(inst_active_[x.index()]);
      }
      std::vector<std::vector<PlaceId>> found;
      for_each_coset(cz_, slots, [&](PlaceId q, std::size_t) { return allows(q, t); },
                     [&](const std::vector<PlaceId>& c) {
                       std::vector<PlaceId> s = c;
                       std::sort(s.begin(), s.end());
                       if (!have_.count({t, s})) found.push_back(std::move(s));
                       return true;
                     });
      for (auto& s : found) {
        add(t, std::move(s));
        if (abort_) return;
      }
    }
  }

  void add(TransitionId t, std::vector<PlaceId> pre) {
    std::size_t depth = 0;
    for (PlaceId q : pre) depth = std::max(depth, pdepth_[q.index()]);
    ++depth;
    if ((opt_.max_depth && depth > *opt_.max_depth) ||
        (opt_.max_transitions && bp_.transition_count() >= *opt_.max_transitions)) {
      if (!(opt_.max_depth && depth > *opt_.max_depth)) {
        exceeded_ = true;
        if (opt_.stop_on_exceed) { abort_ = true; return; }
      }
      horizon_.insert(pre.begin(), pre.end());
      return;
    }
    have_.insert({t, pre});
    std::vector<std::uint32_t> key{1, t.value()};
    for (PlaceId q : pre) key.push_back(pkey_[q.index()]);
    std::sort(key.begin() + 2, key.end());
    std::uint32_t tk = table_.intern(std::move(key));
    TransitionId e = bp_.add_event(t, pre);
    tkey_.push_back(tk);
    for (PlaceId q : bp_.occ().post(e)) on_new_place(q, depth, table_.intern({0, bp_.image(q).value(), tk}));
    cz_.update(bp_.occ());
    for (PlaceId q : bp_.occ().post(e)) check_safe_place(bp_, cz_, inst_all_, q);

    if (opt_.prc_cutoffs) {
      Cut c = lkc(bp_, cz_, e);
      Cut rest = c;
      for (PlaceId q : bp_.occ().post(e)) rest.erase(q);
      auto k = std::make_pair(bp_.image(c), rest.vec());
      auto& list = prc_index_[k];
      for (TransitionId e1 : list)
        if (cz_.less(e1, e)) {
          frontier_.push_back({e, e1, ImitationKind::prc});
          for (PlaceId q : bp_.occ().post(e)) state_[q.index()] = frozen;
          return;
        }
      list.push_back(e);
    }
    for (PlaceId q : bp_.occ().post(e)) activate(q);
  }

  Realization materialize(Realization r) {
    NodeSet keep;
    for (std::size_t i = 0; i < bp_.place_count(); ++i) keep.places.set(i);
    for (std::size_t i = 0; i < bp_.transition_count(); ++i) keep.transitions.set(i);
    std::vector<FrontierEntry> extra;
    if (!opt_.sqc.empty()) {
      std::map<std::uint32_t, TransitionId> by_key;
      for (std::size_t i = 0; i < bp_.transition_count(); ++i) by_key.emplace(tkey_[i], TransitionId(i));
      LoopIndex li(bp_, cz_);
      for (std::size_t i = 0; i < bp_.transition_count(); ++i) {
        TransitionId e(i);
        auto it = opt_.sqc.find(tkey_[i]);
        if (it == opt_.sqc.end() || !keep.has(e)) continue;
        auto tg = by_key.find(it->second);
        if (tg == by_key.end() || !cz_.less(tg->second, e)) continue;
        Segment s = segment(li, e);
        for (std::size_t j = 0; j < bp_.transition_count(); ++j) {
          TransitionId u(j);
          if (u != e && cz_.leq(e, u) && !s.nodes.has(u)) keep.transitions.reset(j);
        }
        for (std::size_t j = 0; j < bp_.place_count(); ++j) {
          PlaceId q(j);
          if (cz_.less(e, q) && !s.nodes.has(q)) keep.places.reset(j);
        }
        extra.push_back({e, tg->second, ImitationKind::sqc});
      }
    }
    std::vector<PlaceId> pm;
    std::vector<TransitionId> tm;
    r.prefix.bp = restrict_to(bp_, keep, base_, [&](PlaceId p) { return bp_.occ().is_initial(p); }, &pm, &tm);
    for (auto& f : frontier_)
      if (tm[f.cutoff.index()].valid() && tm[f.target.index()].valid())
        r.prefix.frontier.push_back({tm[f.cutoff.index()], tm[f.target.index()], f.kind});
    for (auto& f : extra)
      if (tm[f.cutoff.index()].valid() && tm[f.target.index()].valid())
        r.prefix.frontier.push_back({tm[f.cutoff.index()], tm[f.target.index()], f.kind});
    std::sort(r.prefix.frontier.begin(), r.prefix.frontier.end());
    for (PlaceId h : horizon_)
      if (pm[h.index()].valid()) r.prefix.horizon.push_back(pm[h.index()]);
    std::sort(r.prefix.horizon.begin(), r.prefix.horizon.end());
    for (PlaceId u : undecided_)
      if (pm[u.index()].valid()) r.undecided.push_back(pm[u.index()]);
    std::sort(r.undecided.begin(), r.undecided.end());
    r.place_key.assign(r.prefix.bp.place_count(), no_key);
    r.transition_key.assign(r.prefix.bp.transition_count(), no_key);
    for (std::size_t i = 0; i < pm.size(); ++i)
      if (pm[i].valid()) r.place_key[pm[i].index()] = pkey_[i];
    for (std::size_t i = 0; i < tm.size(); ++i)
      if (tm[i].valid()) r.transition_key[tm[i].index()] = tkey_[i];
    return r;
  }

  const Game& g_;
  const CommitmentFn& fn_;
  const RealizeOptions& opt_;
  KeyTable& table_;
  std::shared_ptr<const Net> base_;
  BranchingProcess bp_;
  Causality cz_;
  std::vector<std::vector<PlaceId>> inst_all_, inst_active_;
  std::vector<State> state_;
  std::vector<std::vector<bool>> allowed_;
  std::vector<std::size_t> pdepth_;
  std::vector<std::uint32_t> pkey_, tkey_;
  std::set<std::pair<TransitionId, std::vector<PlaceId>>> have_;
  std::map<std::pair<Marking, std::vector<PlaceId>>, std::vector<TransitionId>> prc_index_;
  std::deque<PlaceId> queue_;
  std::vector<FrontierEntry> frontier_;
  std::set<PlaceId> horizon_;
  std::vector<PlaceId> undecided_;
  bool exceeded_ = false;
  bool abort_ = false;
};

}  // namespace detail

// Builds the strategy prefix in which every system place allows exactly its
// committed transitions: all possible extensions whose system places allow
// them are added, until cutoffs or limits stop the construction.
inline Realization realize(const Game& g, const CommitmentFn& fn, const RealizeOptions& opt, KeyTable& table) {
  return detail::Builder(g, fn, opt, table).run();
}

inline Realization realize(const Game& g, const CommitmentFn& fn, const RealizeOptions& opt = {}) {
  KeyTable table;
  return realize(g, fn, opt, table);
}

// Memoryless commitment: every instance of a base place allows the same
// transitions. Places missing from the rule allow all their transitions.
inline CommitmentFn positional(const Game& g, std::map<PlaceId, std::vector<TransitionId>> rule) {
  return [&g, rule = std::move(rule)](const BranchingProcess& bp, PlaceId p,
                                      std::uint32_t) -> std::optional<std::vector<TransitionId>> {
    PlaceId b = bp.image(p);
    auto it = rule.find(b);
    if (it != rule.end()) return it->second;
    auto cs = g.net.consumers(b);
    return std::vector<TransitionId>(cs.begin(), cs.end());
  };
}

// ---------------------------------------------------------------------------
// synthesis

enum class SynthesisStatus { found, not_found, inconclusive };

inline const char* to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::found: return "found";
    case SynthesisStatus::not_found: return "not_found";
    case SynthesisStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ImitationEntry {
  Cut source;  // lkc of the cutoff
  Cut target;  // lkc of the imitated transition
  ImitationKind kind;
};

struct SynthesisStats {
  std::uint64_t nodes = 0;
  std::uint64_t leaves_verified = 0;
  std::uint64_t largest_prefix = 0;
  double elapsed_ms = 0;
};

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::not_found;
  std::optional<StrategyPrefix> prefix;
  std::vector<ImitationEntry> imitation_map;
  SynthesisStats stats;
  std::size_t players = 0;

  bool found() const { return status == SynthesisStatus::found; }
};

struct SynthesisBudget {
  std::optional<std::chrono::milliseconds> time;
  std::optional<std::uint64_t> nodes;
};

struct SynthesisOptions {
  std::size_t bound = 0;  // largest number of transitions of a candidate
  SynthesisBudget budget;
  // segment cutoffs; defaults to on for three or more players
  std::optional<bool> sqc_cutoffs;
  // prune candidates early whose settled cuts already fail a condition
  bool prune = true;
  VerifyOptions verify;
};

namespace detail {

// all subsets of the consumers of b: smaller sets first, lexicographic
// within a size
inline std::vector<std::vector<TransitionId>> commitment_choices(const Net& net, PlaceId b) {
  std::vector<TransitionId> ts(net.consumers(b).begin(), net.consumers(b).end());
  std::sort(ts.begin(), ts.end());
  std::vector<std::vector<TransitionId>> out;
  std::size_t n = ts.size();
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<bool> sel(n, false);
    std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      std::vector<TransitionId> s;
      for (std::size_t i = 0; i < n; ++i)
        if (sel[i]) s.push_back(ts[i]);
      out.push_back(std::move(s));
    } while (std::prev_permutation(sel.begin(), sel.end()));
  }
  return out;
}

class Search {
 public:
  Search(const Game& g, const SynthesisOptions& opt, bool sqc)
      : g_(g), opt_(opt), sqc_(sqc), start_(std::chrono::steady_clock::now()) {
    fn_ = [this](const BranchingProcess&, PlaceId, std::uint32_t key) -> std::optional<std::vector<TransitionId>> {
      auto it = sketch_.find(key);
      if (it == sketch_.end()) return std::nullopt;
      return it->second;
    };
    ropt_.max_transitions = opt.bound;
    ropt_.stop_on_exceed = true;
  }

  SynthesisResult run() {
    SynthesisResult res;
    bool ok = dfs();
    res.stats = stats_;
    res.stats.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    if (ok) {
      res.status = SynthesisStatus::found;
      res.prefix = std::move(found_);
      Causality cz(res.prefix->bp);
      for (auto& f : res.prefix->frontier)
        res.imitation_map.push_back({lkc(res.prefix->bp, cz, f.cutoff), lkc(res.prefix->bp, cz, f.target), f.kind});
    } else {
      res.status = out_of_budget_ ? SynthesisStatus::inconclusive : SynthesisStatus::not_found;
    }
    return res;
  }

 private:
  bool budget_left() {
    if (opt_.budget.nodes && stats_.nodes >= *opt_.budget.nodes) return false;
    if (opt_.budget.time && std::chrono::steady_clock::now() - start_ > *opt_.budget.time) return false;
    return true;
  }

  bool dfs() {
    if (!budget_left()) {
      out_of_budget_ = true;
      return false;
    }
    ++stats_.nodes;
    Realization r = realize(g_, fn_, ropt_, table_);
    if (r.exceeded) return false;
    std::vector<std::uint32_t> added;
    std::vector<TransitionId> pending;
    if (sqc_) {
      for (;;) {
        auto found = detect_segment_cutoffs(r, pending);
        if (found.empty()) break;
        for (auto& [k, v] : found) {
          ropt_.sqc[k] = v;
          added.push_back(k);
        }
        r = realize(g_, fn_, ropt_, table_);
        if (r.exceeded) {
          undo(added);
          return false;
        }
      }
    }
    stats_.largest_prefix = std::max<std::uint64_t>(stats_.largest_prefix, r.prefix.bp.transition_count());
    bool result = false;
    if (!(opt_.prune && fails_early(r, pending))) {
      if (r.undecided.empty()) {
        ++stats_.leaves_verified;
        if (verify(g_, r.prefix, opt_.verify).passed()) {
          found_ = std::move(r.prefix);
          result = true;
        }
      } else {
        PlaceId p = r.undecided.front();
        std::uint32_t key = r.place_key[p.index()];
        for (auto& choice : commitment_choices(g_.net, r.prefix.bp.image(p))) {
          sketch_[key] = choice;
          if (dfs()) { result = true; break; }
          if (out_of_budget_) break;
        }
        if (!result) sketch_.erase(key);
      }
    }
    if (!result) undo(added);
    return result;
  }

  void undo(const std::vector<std::uint32_t>& added) {
    for (auto k : added) ropt_.sqc.erase(k);
  }

  // pairs (e1 < e) with equal last known markings whose segments are fully
  // decided and isomorphic; undecided pairs are returned as pending
  std::vector<std::pair<std::uint32_t, std::uint32_t>> detect_segment_cutoffs(const Realization& r,
                                                                              std::vector<TransitionId>& pending) {
    pending.clear();
    const BranchingProcess& bp = r.prefix.bp;
    Causality cz(bp);
    LoopIndex li(bp, cz);
    Bitset beyond;  // places and transitions past existing cutoffs
    Bitset cutoff;
    for (auto& f : r.prefix.frontier) cutoff.set(f.cutoff.index());
    for (std::size_t i = 0; i < bp.transition_count(); ++i)
      for (auto& f : r.prefix.frontier)
        if (cz.less(f.cutoff, TransitionId(i))) beyond.set(i);
    Bitset undecided;
    for (PlaceId p : r.undecided) undecided.set(p.index());
    std::map<std::size_t, std::optional<Segment>> segs;
    auto seg = [&](TransitionId t) -> const Segment& {
      auto& s = segs[t.index()];
      if (!s) s = segment(li, t);
      return *s;
    };
    auto closed = [&](TransitionId t) {
      const Segment& s = seg(t);
      bool ok = true;
      s.nodes.places.for_each([&](std::size_t i) {
        if (undecided.test(i)) ok = false;
      });
      // undecided places of the future outside the segment that are not
      // after t may still shape the segment
      NodeSet fut = future_nodes(bp, cz, li.lkc(t));
      fut.places.for_each([&](std::size_t i) {
        if (undecided.test(i) && !cz.less(t, PlaceId(i))) ok = false;
      });
      return ok;
    };
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::size_t i = 0; i < bp.transition_count(); ++i) {
      TransitionId e(i);
      if (cutoff.test(i) || beyond.test(i)) continue;
      bool has_candidate = false, resolved = true;
      for (std::size_t j = 0; j < i; ++j) {
        TransitionId e1(j);
        if (cutoff.test(j) || beyond.test(j) || li.lkm(e1) != li.lkm(e) || !cz.less(e1, e)) continue;
        has_candidate = true;
        if (!closed(e) || !closed(e1)) {
          resolved = false;
          continue;
        }
        if (is_isomorphic(segment_process(li, seg(e1)), segment_process(li, seg(e)))) {
          out.emplace_back(r.transition_key[i], r.transition_key[j]);
          break;
        }
      }
      if (has_candidate && !resolved) pending.push_back(e);
      if (!out.empty()) break;
    }
    return out;
  }

  // a cut whose outcome can no longer change already violates a condition
  bool fails_early(const Realization& r, const std::vector<TransitionId>& pending) {
    const BranchingProcess& bp = r.prefix.bp;
    Causality cz(bp);
    std::vector<Cut> all;
    try {
      all = cuts(bp, cz, opt_.verify.cut_cap);
    } catch (const overflow_error&) {
      return false;
    }
    Bitset tentative;  // places whose cuts may still vanish or be deferred
    for (std::size_t i = 0; i < bp.place_count(); ++i)
      for (TransitionId e : pending)
        if (cz.less(e, PlaceId(i))) tentative.set(i);
    Bitset open;  // undecided, horizon or beyond a cutoff
    for (PlaceId p : r.undecided) open.set(p.index());
    for (PlaceId p : r.prefix.horizon) open.set(p.index());
    LoopIndex li(bp, cz);
    std::vector<Bitset> fut;
    for (auto& f : r.prefix.frontier) {
      fut.push_back(future_nodes(bp, cz, li.lkc(f.cutoff)).places);
      for (std::size_t i = 0; i < bp.place_count(); ++i)
        if (cz.less(f.cutoff, PlaceId(i))) open.set(i);
    }
    std::vector<Cut> settled;
    for (const Cut& c : all) {
      bool t = false;
      for (PlaceId p : c)
        if (tentative.test(p.index())) t = true;
      if (!t) settled.push_back(c);
    }
    if (check_safety(g_, bp, settled, cz, opt_.verify.bad).outcome == Outcome::fail) return true;
    if (check_determinism(g_, bp, settled, cz).outcome == Outcome::fail) return true;
    auto dl = check_deadlock_avoiding(g_, bp, settled, cz, [&](const Cut& c) {
      for (PlaceId p : c)
        if (open.test(p.index())) return true;
      for (auto& fp : fut) {
        bool inside = true;
        for (PlaceId p : c)
          if (!fp.test(p.index())) { inside = false; break; }
        if (inside) return true;
      }
      return false;
    });
    return dl.outcome == Outcome::fail;
  }

  const Game& g_;
  const SynthesisOptions& opt_;
  bool sqc_;
  std::chrono::steady_clock::time_point start_;
  KeyTable table_;
  std::map<std::uint32_t, std::vector<TransitionId>> sketch_;
  CommitmentFn fn_;
  RealizeOptions ropt_;
  SynthesisStats stats_;
  std::optional<StrategyPrefix> found_;
  bool out_of_budget_ = false;
};

}  // namespace detail

// Bounded synthesis: depth-first search over commitments of system place
// instances, in order of place creation, smallest commitment first. The
// first candidate within the bound whose prefix verifies is returned.
inline SynthesisResult synthesize(const Game& g, const SynthesisOptions& opt) {
  ValidationReport rep = validate_game(g, false);
  if (!rep.ok()) throw input_error("invalid game: " + rep.violations.front().rule);
  std::size_t k = player_count(g);
  if (k > 4) throw unsupported_error("synthesis supports at most four players");
  bool sqc = opt.sqc_cutoffs.value_or(k >= 3);
  SynthesisResult r = detail::Search(g, opt, sqc).run();
  r.players = k;
  return r;
}

inline SynthesisResult synthesize(const Game& g, std::size_t bound, SynthesisBudget budget = {}) {
  SynthesisOptions opt;
  opt.bound = bound;
  opt.budget = budget;
  return synthesize(g, opt);
}

// ---------------------------------------------------------------------------
// cut-and-glue on strategy prefixes

// Applies bp − Fut(c2) + Fut(c1)' and carries the frontier and horizon over
// to the result. Cutoffs whose future became explicit are dropped; the
// others keep, in order of preference, a target on the same side.
inline StrategyPrefix cut_and_glue_prefix(const StrategyPrefix& sp, const Cut& c1, const Cut& c2) {
  const BranchingProcess& bp = sp.bp;
  Causality cz(bp);
  GlueResult gr = cut_and_glue_detailed(bp, cz, c1, c2);
  StrategyPrefix out;
  out.bp = std::move(gr.bp);
  Causality ncz(out.bp);
  LoopIndex nli(out.bp, ncz);
  const Net& nocc = out.bp.occ();

  auto images = [&](auto x, const auto& kept, const auto& copy) {
    std::vector<decltype(x)> v;
    if (copy[x.index()].valid()) v.push_back(copy[x.index()]);
    if (kept[x.index()].valid()) v.push_back(kept[x.index()]);
    return v;
  };
  std::set<FrontierEntry> entries;
  for (const FrontierEntry& f : sp.frontier) {
    bool copied = gr.copy_transition[f.cutoff.index()].valid();
    for (TransitionId k : images(f.cutoff, gr.kept_transition, gr.copy_transition)) {
      bool has_succ = false;
      for (PlaceId q : nocc.post(k))
        if (!nocc.consumers(q).empty()) has_succ = true;
      if (has_succ && f.kind == ImitationKind::prc) continue;
      bool is_copy = copied && k == gr.copy_transition[f.cutoff.index()];
      std::vector<TransitionId> targets;
      TransitionId tc = gr.copy_transition[f.target.index()], tk = gr.kept_transition[f.target.index()];
      if (is_copy) { targets = {tc, tk}; } else { targets = {tk, tc}; }
      for (TransitionId t : targets) {
        if (!t.valid()) continue;
        FrontierEntry e{k, t, f.kind};
        if (detail::frontier_problem(out.bp, nli, e).empty()) {
          entries.insert(e);
          break;
        }
      }
    }
  }
  out.frontier.assign(entries.begin(), entries.end());
  Bitset blocked;
  for (auto& f : out.frontier)
    for (std::size_t i = 0; i < out.bp.place_count(); ++i)
      if (ncz.less(f.cutoff, PlaceId(i))) blocked.set(i);
  std::set<PlaceId> old_open(sp.horizon.begin(), sp.horizon.end());
  for (auto& f : sp.frontier)
    for (std::size_t i = 0; i < bp.place_count(); ++i)
      if (cz.less(f.cutoff, PlaceId(i))) old_open.insert(PlaceId(i));
  std::set<PlaceId> hz;
  for (PlaceId x : old_open)
    for (PlaceId y : images(x, gr.kept_place, gr.copy_place))
      if (nocc.consumers(y).empty() && !blocked.test(y.index())) hz.insert(y);
  out.horizon.assign(hz.begin(), hz.end());
  return out;
}

// Unrolls the frontier: each step glues the future of a target's last known
// cut onto its cutoff, taking the entry with the smallest cutoff first.
inline StrategyPrefix expand(const StrategyPrefix& sp, std::size_t steps) {
  StrategyPrefix cur = sp;
  for (std::size_t i = 0; i < steps && !cur.frontier.empty(); ++i) {
    const FrontierEntry f = cur.frontier.front();
    Causality cz(cur.bp);
    Cut from = lkc(cur.bp, cz, f.target);
    Cut to = lkc(cur.bp, cz, f.cutoff);
    cur = cut_and_glue_prefix(cur, from, to);
  }
  return cur;
}

inline StrategyPrefix expand(const SynthesisResult& r, std::size_t steps) {
  if (!r.prefix) throw input_error("no strategy to expand");
  return expand(*r.prefix, steps);
}

}  // namespace pgame
