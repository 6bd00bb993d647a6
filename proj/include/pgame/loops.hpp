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

#include "pgame/unfold.hpp"

namespace pgame {

// Per-transition last known cuts of a process, and the repetition relations
// derived from them.
class LoopIndex {
 public:
  LoopIndex(const BranchingProcess& bp, const Causality& cz) : bp_(&bp), cz_(&cz) {
    std::size_t n = bp.transition_count();
    lkc_.reserve(n);
    lkm_.reserve(n);
    rest_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      TransitionId t(i);
      Cut c = pgame::lkc(bp, cz, t);
      Cut r = c;
      for (PlaceId q : bp.occ().post(t)) r.erase(q);
      lkm_.push_back(bp.image(c));
      lkc_.push_back(std::move(c));
      rest_.push_back(std::move(r));
    }
  }

  const BranchingProcess& bp() const { return *bp_; }
  const Causality& causality() const { return *cz_; }
  const Cut& lkc(TransitionId t) const { return lkc_.at(t.index()); }
  const Marking& lkm(TransitionId t) const { return lkm_.at(t.index()); }
  // lkc(t) \ post(t)
  const Cut& rest(TransitionId t) const { return rest_.at(t.index()); }

  // equal last known markings and equal untouched remainder
  bool prc(TransitionId a, TransitionId b) const { return lkm(a) == lkm(b) && rest(a) == rest(b); }
  bool prc_loop(TransitionId a, TransitionId b) const { return prc(a, b) && cz_->less(a, b); }

 private:
  const BranchingProcess* bp_;
  const Causality* cz_;
  std::vector<Cut> lkc_;
  std::vector<Marking> lkm_;
  std::vector<Cut> rest_;
};

struct PrcPair {
  TransitionId first, second;
  bool loop = false;
  friend auto operator<=>(const PrcPair&, const PrcPair&) = default;
};

// every ordered pair of distinct transitions in prc relation
inline std::vector<PrcPair> find_prc(const LoopIndex& li) {
  std::vector<PrcPair> out;
  std::size_t n = li.bp().transition_count();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      TransitionId a(i), b(j);
      if (li.prc(a, b)) out.push_back({a, b, li.prc_loop(a, b)});
    }
  return out;
}

inline std::vector<PrcPair> find_prc(const BranchingProcess& bp) {
  Causality cz(bp);
  LoopIndex li(bp, cz);
  return find_prc(li);
}

// ---------------------------------------------------------------------------
// synchronisation segments

struct Segment {
  TransitionId anchor;
  Cut initial;  // lkc(anchor)
  NodeSet nodes;  // members, as ids of the enclosing process
  std::vector<TransitionId> transitions;
  // every excluded transition of the future meets one of the exclusion rules
  bool definition_holds = true;
  // a different admission order yields a different node set
  bool order_sensitive = false;
  // transitions of the future that were left out
  std::vector<TransitionId> excluded;
};

namespace detail {

inline NodeSet admit_segment(const LoopIndex& li, TransitionId anchor, const NodeSet& fut, const Cut& init,
                             const Bitset& forced, bool reverse, std::vector<TransitionId>& admitted) {
  const BranchingProcess& bp = li.bp();
  const Causality& cz = li.causality();
  const Net& occ = bp.occ();
  NodeSet seg;
  for (PlaceId p : init) seg.places.set(p.index());
  admitted.clear();

  auto rule_a = [&](TransitionId u) {
    for (PlaceId p : occ.pre(u))
      if (!cz.leq(anchor, p)) return false;
    return true;
  };
  auto rule_b = [&](TransitionId u) {
    // loop ends inside the segment
    std::vector<TransitionId> ends;
    for (TransitionId t2 : admitted)
      for (TransitionId t1 : admitted)
        if (li.prc_loop(t1, t2)) { ends.push_back(t2); break; }
    if (ends.empty()) return false;
    for (TransitionId t3 : admitted) {
      if (!li.prc(u, t3)) continue;
      for (TransitionId t2 : ends)
        if (cz.leq(t3, t2)) return true;
    }
    return false;
  };

  std::vector<TransitionId> cand;
  for (std::size_t i = 0; i < bp.transition_count(); ++i)
    if (fut.has(TransitionId(i))) cand.push_back(TransitionId(i));
  std::vector<bool> decided(bp.transition_count(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    // pick the first (or last) ready candidate in topological order
    std::optional<TransitionId> pick;
    auto ready = [&](TransitionId u) {
      if (decided[u.index()]) return false;
      for (PlaceId p : occ.pre(u))
        if (!seg.has(p)) return false;
      return true;
    };
    if (!reverse) {
      for (TransitionId u : cz.topological_order())
        if (fut.has(u) && ready(u)) { pick = u; break; }
    } else {
      // among ready candidates, the one with the largest id
      for (auto it = cand.rbegin(); it != cand.rend(); ++it)
        if (ready(*it)) { pick = *it; break; }
    }
    if (!pick) break;
    TransitionId u = *pick;
    decided[u.index()] = true;
    progress = true;
    if (!forced.test(u.index()) && (rule_a(u) || rule_b(u))) continue;
    seg.transitions.set(u.index());
    admitted.push_back(u);
    for (PlaceId q : occ.post(u)) seg.places.set(q.index());
  }
  return seg;
}

}  // namespace detail

// Seg(t): grows the segment from lkc(t), admitting ready transitions of
// Fut(lkc(t)) unless an exclusion rule applies. Exclusions that break the
// rules downstream force the offending transition and its past back in.
inline Segment segment(const LoopIndex& li, TransitionId t) {
  const BranchingProcess& bp = li.bp();
  const Causality& cz = li.causality();
  Segment s;
  s.anchor = t;
  s.initial = li.lkc(t);
  NodeSet fut = future_nodes(bp, cz, s.initial);
  const Net& occ = bp.occ();
  Bitset forced;
  std::vector<TransitionId> admitted;
  for (;;) {
    s.nodes = detail::admit_segment(li, t, fut, s.initial, forced, false, admitted);
    // exclusion check for every transition of the future
    auto rule_ok = [&](TransitionId u) {
      bool a = true;
      for (PlaceId p : occ.pre(u))
        if (!cz.leq(t, p)) a = false;
      if (a) return true;
      std::vector<TransitionId> ends;
      for (TransitionId t2 : admitted)
        for (TransitionId t1 : admitted)
          if (li.prc_loop(t1, t2)) { ends.push_back(t2); break; }
      for (TransitionId t3 : admitted) {
        if (!li.prc(u, t3)) continue;
        for (TransitionId t2 : ends)
          if (cz.leq(t3, t2)) return true;
      }
      return false;
    };
    bool grew = false;
    for (std::size_t i = 0; i < bp.transition_count(); ++i) {
      TransitionId u(i);
      if (!fut.has(u) || s.nodes.has(u) || rule_ok(u)) continue;
      // force u and its past inside the future
      cz.hist(u).for_each([&](std::size_t j) {
        if (fut.has(TransitionId(j)) && !forced.test(j)) {
          forced.set(j);
          grew = true;
        }
      });
    }
    if (!grew) break;
  }
  s.transitions = admitted;
  std::sort(s.transitions.begin(), s.transitions.end());
  for (std::size_t i = 0; i < bp.transition_count(); ++i)
    if (fut.has(TransitionId(i)) && !s.nodes.has(TransitionId(i))) s.excluded.push_back(TransitionId(i));
  // definition check: excluded transitions satisfy the rules w.r.t. the result
  for (TransitionId u : s.excluded) {
    bool a = true;
    for (PlaceId p : occ.pre(u))
      if (!cz.leq(t, p)) a = false;
    if (a) continue;
    bool b = false;
    for (TransitionId t3 : s.transitions) {
      if (!li.prc(u, t3)) continue;
      for (TransitionId t2 : s.transitions) {
        if (!cz.leq(t3, t2)) continue;
        for (TransitionId t1 : s.transitions)
          if (li.prc_loop(t1, t2)) { b = true; break; }
        if (b) break;
      }
      if (b) break;
    }
    if (!b) s.definition_holds = false;
  }
  std::vector<TransitionId> other;
  NodeSet rev = detail::admit_segment(li, t, fut, s.initial, forced, true, other);
  s.order_sensitive = !(rev.places == s.nodes.places && rev.transitions == s.nodes.transitions);
  return s;
}

// the segment as a process of its own, over the base rebased to lkm(t)
inline BranchingProcess segment_process(const LoopIndex& li, const Segment& s) {
  const BranchingProcess& bp = li.bp();
  return detail::restrict_to(bp, s.nodes, detail::rebase(bp.base(), bp.image(s.initial)),
                             [&](PlaceId p) { return s.initial.contains(p); });
}

inline Segment segment(const BranchingProcess& bp, TransitionId t) {
  Causality cz(bp);
  LoopIndex li(bp, cz);
  return segment(li, t);
}

// Seg(a) ≅ Seg(b)
inline bool sqc(const LoopIndex& li, TransitionId a, TransitionId b) {
  if (li.lkm(a) != li.lkm(b)) return false;
  return is_isomorphic(segment_process(li, segment(li, a)), segment_process(li, segment(li, b)));
}
inline bool sqc_loop(const LoopIndex& li, TransitionId a, TransitionId b) {
  return li.causality().less(a, b) && sqc(li, a, b);
}

struct SqcPair {
  TransitionId first, second;
  bool loop = false;
  friend auto operator<=>(const SqcPair&, const SqcPair&) = default;
};

// every ordered pair of distinct transitions with isomorphic segments
inline std::vector<SqcPair> find_sqc(const LoopIndex& li) {
  const BranchingProcess& bp = li.bp();
  std::size_t n = bp.transition_count();
  KeyTable table;
  std::vector<std::vector<std::uint32_t>> form(n);
  std::vector<bool> exact(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    BranchingProcess sp = segment_process(li, segment(li, TransitionId(i)));
    auto k = canonical_keys(sp, Causality(sp), table);
    form[i] = k.multiset();
    exact[i] = k.unique();
  }
  std::vector<SqcPair> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      TransitionId a(i), b(j);
      if (li.lkm(a) != li.lkm(b) || form[i] != form[j]) continue;
      if (!(exact[i] && exact[j]) && !sqc(li, a, b)) continue;
      out.push_back({a, b, li.causality().less(a, b)});
    }
  return out;
}

inline std::vector<SqcPair> find_sqc(const BranchingProcess& bp) {
  Causality cz(bp);
  LoopIndex li(bp, cz);
  return find_sqc(li);
}

}  // namespace pgame
