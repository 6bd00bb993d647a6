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

#include <memory>
#include <variant>

#include "pgame/detail/bitset.hpp"
#include "pgame/net.hpp"

namespace pgame {

using detail::Bitset;
using Node = std::variant<PlaceId, TransitionId>;

// A cut is a marking of the occurrence net.
using Cut = Marking;

// ---------------------------------------------------------------------------
// branching processes

// An occurrence net together with its homomorphism into a base net. Every node
// carries a uid; subtraction and gluing identify nodes by uid.
class BranchingProcess {
 public:
  BranchingProcess() : base_(std::make_shared<Net>()) {}
  explicit BranchingProcess(std::shared_ptr<const Net> base) : base_(std::move(base)) {
    place_counter_.assign(base_->place_count(), 0);
    transition_counter_.assign(base_->transition_count(), 0);
  }

  const Net& occ() const { return occ_; }
  const Net& base() const { return *base_; }
  const std::shared_ptr<const Net>& base_ptr() const { return base_; }

  std::size_t place_count() const { return occ_.place_count(); }
  std::size_t transition_count() const { return occ_.transition_count(); }

  PlaceId image(PlaceId p) const { return place_image_.at(p.index()); }
  TransitionId image(TransitionId t) const { return transition_image_.at(t.index()); }
  std::uint64_t uid(PlaceId p) const { return place_uid_.at(p.index()); }
  std::uint64_t uid(TransitionId t) const { return transition_uid_.at(t.index()); }
  std::uint32_t instance(PlaceId p) const { return place_instance_.at(p.index()); }
  std::uint32_t instance(TransitionId t) const { return transition_instance_.at(t.index()); }

  Marking image(const Marking& m) const {
    std::vector<PlaceId> v;
    for (PlaceId p : m) v.push_back(image(p));
    return Marking(std::move(v));
  }

  // Raw construction. A missing uid is freshly allocated; instance 0 means
  // "next free instance number of the image".
  PlaceId add_place(PlaceId image, std::string label, bool initial, std::optional<std::uint64_t> uid = {},
                    std::uint32_t instance = 0) {
    if (!base_->has(image)) throw input_error("place image out of range");
    instance = take_instance(place_counter_, image.index(), instance);
    if (label.empty()) label = base_->label(image) + "_" + std::to_string(instance);
    PlaceId id = occ_.add_place(std::move(label), initial);
    place_image_.push_back(image);
    place_uid_.push_back(take_uid(uid));
    place_instance_.push_back(instance);
    return id;
  }

  TransitionId add_transition(TransitionId image, std::string label, std::vector<PlaceId> pre,
                              std::vector<PlaceId> post, std::optional<std::uint64_t> uid = {},
                              std::uint32_t instance = 0) {
    if (!base_->has(image)) throw input_error("transition image out of range");
    instance = take_instance(transition_counter_, image.index(), instance);
    if (label.empty()) label = base_->label(image) + "_" + std::to_string(instance);
    TransitionId id = occ_.add_transition(std::move(label), std::move(pre), std::move(post));
    transition_image_.push_back(image);
    transition_uid_.push_back(take_uid(uid));
    transition_instance_.push_back(instance);
    dangling_.emplace_back();
    return id;
  }

  PlaceId add_initial(PlaceId image) { return add_place(image, "", true); }

  // adds an event for base transition t on the given preset together with
  // fresh post places, one per post place of t
  TransitionId add_event(TransitionId t, std::vector<PlaceId> pre) {
    std::vector<PlaceId> post;
    for (PlaceId b : base_->post(t)) post.push_back(add_place(b, "", false));
    return add_transition(t, "", std::move(pre), std::move(post));
  }

  // arcs of a transition that refer to nodes absent from this process
  struct Dangling {
    std::vector<std::uint64_t> pre, post;
    bool empty() const { return pre.empty() && post.empty(); }
  };
  const Dangling& dangling(TransitionId t) const { return dangling_.at(t.index()); }
  void set_dangling(TransitionId t, Dangling d) { dangling_.at(t.index()) = std::move(d); }
  bool has_dangling() const {
    return std::any_of(dangling_.begin(), dangling_.end(), [](const Dangling& d) { return !d.empty(); });
  }

  std::optional<PlaceId> find_place_uid(std::uint64_t u) const {
    for (std::size_t i = 0; i < place_uid_.size(); ++i)
      if (place_uid_[i] == u) return PlaceId(i);
    return std::nullopt;
  }
  std::optional<TransitionId> find_transition_uid(std::uint64_t u) const {
    for (std::size_t i = 0; i < transition_uid_.size(); ++i)
      if (transition_uid_[i] == u) return TransitionId(i);
    return std::nullopt;
  }
  std::uint64_t next_uid() const { return next_uid_; }
  void reserve_uids(std::uint64_t from) { next_uid_ = std::max(next_uid_, from); }

  // rebinds the process to an equal-shaped base net (e.g. after rebasing)
  void set_base(std::shared_ptr<const Net> base) {
    if (base->place_count() != base_->place_count() || base->transition_count() != base_->transition_count())
      throw input_error("base nets differ in shape");
    base_ = std::move(base);
  }

  void set_initial_flag(PlaceId p, bool on) { occ_.set_initial_flag(p, on); }

 private:
  std::uint64_t take_uid(std::optional<std::uint64_t> u) {
    std::uint64_t v = u ? *u : next_uid_;
    next_uid_ = std::max(next_uid_, v + 1);
    return v;
  }
  static std::uint32_t take_instance(std::vector<std::uint32_t>& counter, std::size_t i, std::uint32_t want) {
    if (i >= counter.size()) counter.resize(i + 1, 0);
    if (want == 0) want = counter[i] + 1;
    counter[i] = std::max(counter[i], want);
    return want;
  }

  std::shared_ptr<const Net> base_;
  Net occ_;
  std::vector<PlaceId> place_image_;
  std::vector<TransitionId> transition_image_;
  std::vector<std::uint64_t> place_uid_, transition_uid_;
  std::vector<std::uint32_t> place_instance_, transition_instance_;
  std::vector<std::uint32_t> place_counter_, transition_counter_;
  std::vector<Dangling> dangling_;
  std::uint64_t next_uid_ = 0;
};

// ---------------------------------------------------------------------------
// causality, conflict and concurrency

enum class Relation { equal, causal_le, causal_ge, conflict, concurrent };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::equal: return "equal";
    case Relation::causal_le: return "causal_le";
    case Relation::causal_ge: return "causal_ge";
    case Relation::conflict: return "conflict";
    case Relation::concurrent: return "concurrent";
  }
  return "?";
}

// Relations of an occurrence net. hist(t) holds the transitions ≤ t and
// conf(t) the transitions in direct conflict with some member of hist(t).
class Causality {
 public:
  Causality() = default;
  explicit Causality(const BranchingProcess& bp) : Causality(bp.occ()) {}

  // throws input_error if the net has a cycle
  explicit Causality(const Net& occ) : net_(&occ) {
    std::size_t n = occ.transition_count();
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (PlaceId p : occ.pre(TransitionId(i))) indeg[i] += occ.producers(p).size();
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
      if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
      std::size_t i = ready.front();
      ready.pop_front();
      order_.push_back(TransitionId(i));
      for (PlaceId q : occ.post(TransitionId(i)))
        for (TransitionId c : occ.consumers(q))
          if (--indeg[c.index()] == 0) ready.push_back(c.index());
    }
    if (order_.size() != n) throw input_error("occurrence net has a cycle");
    hist_.resize(n);
    conf_.resize(n);
    for (TransitionId t : order_) compute(t);
    done_ = n;
  }

  // Extends the relations to transitions appended to the net since the last
  // call. New transitions must only consume places produced by known ones.
  void update(const Net& occ) {
    net_ = &occ;
    std::size_t n = occ.transition_count();
    hist_.resize(n);
    conf_.resize(n);
    for (std::size_t i = done_; i < n; ++i) {
      TransitionId t(i);
      order_.push_back(t);
      compute(t);
      propagate_conflicts(t);
    }
    done_ = n;
  }

  const Net& net() const { return *net_; }
  const std::vector<TransitionId>& topological_order() const { return order_; }
  const Bitset& hist(TransitionId t) const { return hist_.at(t.index()); }

  // transitions strictly before p
  Bitset past(PlaceId p) const {
    Bitset b;
    for (TransitionId t : net_->producers(p)) b |= hist_[t.index()];
    return b;
  }

  bool leq(Node x, Node y) const {
    if (x == y) return true;
    if (auto* t = std::get_if<TransitionId>(&x)) return contains_history(y, *t);
    PlaceId p = std::get<PlaceId>(x);
    for (TransitionId c : net_->consumers(p))
      if (contains_history(y, c)) return true;
    return false;
  }
  bool less(Node x, Node y) const { return x != y && leq(x, y); }

  bool conflict(Node x, Node y) const {
    if (auto* t = std::get_if<TransitionId>(&x)) return conflict_from(conf_[t->index()], y);
    for (TransitionId t : net_->producers(std::get<PlaceId>(x)))
      if (conflict_from(conf_[t.index()], y)) return true;
    return false;
  }

  Relation classify(Node x, Node y) const {
    if (x == y) return Relation::equal;
    if (leq(x, y)) return Relation::causal_le;
    if (leq(y, x)) return Relation::causal_ge;
    if (conflict(x, y)) return Relation::conflict;
    return Relation::concurrent;
  }
  bool concurrent(Node x, Node y) const { return classify(x, y) == Relation::concurrent; }

  bool self_conflict(TransitionId t) const { return conf_[t.index()].intersects(hist_[t.index()]); }

  // pairwise concurrent set of places
  template <class Range>
  bool is_coset(const Range& ps) const {
    std::vector<PlaceId> v(ps.begin(), ps.end());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        if (!concurrent(v[i], v[j])) return false;
    return true;
  }

 private:
  bool contains_history(Node y, TransitionId t) const {
    if (auto* u = std::get_if<TransitionId>(&y)) return hist_[u->index()].test(t.index());
    for (TransitionId p : net_->producers(std::get<PlaceId>(y)))
      if (hist_[p.index()].test(t.index())) return true;
    return false;
  }
  bool conflict_from(const Bitset& conf, Node y) const {
    if (auto* u = std::get_if<TransitionId>(&y)) return conf.intersects(hist_[u->index()]);
    for (TransitionId p : net_->producers(std::get<PlaceId>(y)))
      if (conf.intersects(hist_[p.index()])) return true;
    return false;
  }

  void compute(TransitionId t) {
    Bitset h;
    h.set(t.index());
    Bitset c = direct_conflicts(t);
    for (PlaceId p : net_->pre(t))
      for (TransitionId u : net_->producers(p)) {
        h |= hist_[u.index()];
        c |= conf_[u.index()];
      }
    hist_[t.index()] = std::move(h);
    conf_[t.index()] = std::move(c);
  }

  Bitset direct_conflicts(TransitionId t) const {
    Bitset d;
    for (PlaceId p : net_->pre(t))
      for (TransitionId u : net_->consumers(p))
        if (u != t) d.set(u.index());
    return d;
  }

  // an appended transition is a new rival of earlier consumers of its preset
  void propagate_conflicts(TransitionId t) {
    Bitset d = direct_conflicts(t);
    if (d.none()) return;
    for (std::size_t i = 0; i < t.index(); ++i)
      if (hist_[i].intersects(d)) conf_[i].set(t.index());
  }

  const Net* net_ = nullptr;
  std::vector<TransitionId> order_;
  std::vector<Bitset> hist_, conf_;
  std::size_t done_ = 0;
};

// ---------------------------------------------------------------------------
// validation

inline ValidationReport validate_bp(const BranchingProcess& bp) {
  ValidationReport r = validate_net(bp.occ());
  const Net& occ = bp.occ();
  const Net& base = bp.base();
  for (std::size_t i = 0; i < occ.transition_count(); ++i)
    if (!bp.dangling(TransitionId(i)).empty()) r.add("dangling arc", {occ.label(TransitionId(i))});
  for (std::size_t i = 0; i < occ.place_count(); ++i) {
    PlaceId p(i);
    if (occ.producers(p).size() > 1) r.add("place has several producers", {occ.label(p)});
    bool init = occ.is_initial(p);
    if (init != occ.producers(p).empty()) r.add("initial marking", {occ.label(p)});
  }
  std::optional<Causality> cz;
  try {
    cz.emplace(occ);
  } catch (const input_error&) {
    r.add("acyclicity");
  }
  if (cz)
    for (std::size_t i = 0; i < occ.transition_count(); ++i)
      if (cz->self_conflict(TransitionId(i))) r.add("self-conflict", {occ.label(TransitionId(i))});

  auto bijective = [&](std::span<const PlaceId> occ_side, std::span<const PlaceId> base_side) {
    std::vector<PlaceId> a, b(base_side.begin(), base_side.end());
    for (PlaceId p : occ_side) a.push_back(bp.image(p));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b && std::adjacent_find(a.begin(), a.end()) == a.end();
  };
  for (std::size_t i = 0; i < occ.transition_count(); ++i) {
    TransitionId t(i);
    TransitionId u = bp.image(t);
    if (!bijective(occ.pre(t), base.pre(u))) r.add("preset homomorphism", {occ.label(t)});
    if (!bijective(occ.post(t), base.post(u))) r.add("postset homomorphism", {occ.label(t)});
  }
  if (!bijective(occ.initial().places(), base.initial().places())) r.add("initial homomorphism");

  // no two transitions with equal image and equal preset
  std::map<std::pair<TransitionId, std::vector<PlaceId>>, TransitionId> seen;
  for (std::size_t i = 0; i < occ.transition_count(); ++i) {
    TransitionId t(i);
    std::vector<PlaceId> pre(occ.pre(t).begin(), occ.pre(t).end());
    std::sort(pre.begin(), pre.end());
    auto [it, fresh] = seen.emplace(std::make_pair(bp.image(t), pre), t);
    if (!fresh) r.add("redundant transition", {occ.label(it->second), occ.label(t)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// helpers

namespace detail {

inline std::vector<std::vector<PlaceId>> instances_by_image(const BranchingProcess& bp) {
  std::vector<std::vector<PlaceId>> out(bp.base().place_count());
  for (std::size_t i = 0; i < bp.place_count(); ++i) out[bp.image(PlaceId(i)).index()].push_back(PlaceId(i));
  return out;
}

// Enumerates co-sets choosing one place per slot, in lexicographic order of
// slot positions. Stops early if f returns false.
template <class Accept, class F>
bool for_each_coset(const Causality& cz, const std::vector<std::vector<PlaceId>>& slots, Accept&& accept, F&& f) {
  std::vector<PlaceId> chosen;
  std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
    if (k == slots.size()) return f(chosen);
    for (PlaceId p : slots[k]) {
      if (!accept(p, k)) continue;
      bool ok = true;
      for (PlaceId q : chosen)
        if (!cz.concurrent(p, q)) { ok = false; break; }
      if (!ok) continue;
      chosen.push_back(p);
      bool go = rec(k + 1);
      chosen.pop_back();
      if (!go) return false;
    }
    return true;
  };
  return rec(0);
}

inline std::set<std::pair<TransitionId, std::vector<PlaceId>>> event_index(const BranchingProcess& bp) {
  std::set<std::pair<TransitionId, std::vector<PlaceId>>> out;
  for (std::size_t i = 0; i < bp.transition_count(); ++i) {
    TransitionId t(i);
    std::vector<PlaceId> pre(bp.occ().pre(t).begin(), bp.occ().pre(t).end());
    std::sort(pre.begin(), pre.end());
    out.emplace(bp.image(t), std::move(pre));
  }
  return out;
}

// a firing sequence of the occurrence net (topologically ordered) executing
// exactly the given set of events
inline std::vector<TransitionId> linearize(const Causality& cz, const Bitset& events) {
  std::vector<TransitionId> seq;
  for (TransitionId t : cz.topological_order())
    if (events.test(t.index())) seq.push_back(t);
  return seq;
}

// events of the configuration leading to a co-set
inline Bitset configuration(const Causality& cz, const Marking& coset) {
  Bitset b;
  for (PlaceId p : coset) b |= cz.past(p);
  return b;
}

}  // namespace detail

// Possible extensions of bp: pairs (t, C) with C a co-set mapped bijectively
// onto pre(t) and no event (t, C) in bp. Ordered by (t, sorted C).
inline std::vector<std::pair<TransitionId, std::vector<PlaceId>>> possible_extensions(const BranchingProcess& bp,
                                                                                      const Causality& cz) {
  auto inst = detail::instances_by_image(bp);
  auto have = detail::event_index(bp);
  std::vector<std::pair<TransitionId, std::vector<PlaceId>>> out;
  const Net& base = bp.base();
  for (std::size_t i = 0; i < base.transition_count(); ++i) {
    TransitionId t(i);
    std::vector<std::vector<PlaceId>> slots;
    for (PlaceId b : base.pre(t)) slots.push_back(inst[b.index()]);
    detail::for_each_coset(cz, slots, [](PlaceId, std::size_t) { return true; },
                           [&](const std::vector<PlaceId>& c) {
                             std::vector<PlaceId> s = c;
                             std::sort(s.begin(), s.end());
                             if (!have.count({t, s})) out.emplace_back(t, std::move(s));
                             return true;
                           });
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// unfolding

struct UnfoldLimit {
  std::optional<std::size_t> max_transitions;
  std::optional<std::size_t> max_depth;
};

struct UnfoldResult {
  BranchingProcess bp;
  // places of possible extensions left out by the limit
  std::vector<PlaceId> horizon;
  bool complete = false;
};

namespace detail {
// throws safety_error if q shares its image with a concurrent place
inline void check_safe_place(const BranchingProcess& bp, const Causality& cz,
                             const std::vector<std::vector<PlaceId>>& inst, PlaceId q) {
  for (PlaceId o : inst[bp.image(q).index()]) {
    if (o == q || !cz.concurrent(o, q)) continue;
    Bitset ev = configuration(cz, Marking{o, q});
    std::vector<TransitionId> seq;
    for (TransitionId t : linearize(cz, ev)) seq.push_back(bp.image(t));
    throw safety_error("base net is unsafe: place '" + bp.base().label(bp.image(q)) + "' can hold two tokens",
                       std::move(seq));
  }
}
}  // namespace detail

// Builds the unfolding breadth first by causal depth. Within a depth the
// extensions are added in (base transition, preset) order, so instance
// numbers follow exploration order.
inline UnfoldResult unfold(std::shared_ptr<const Net> base, UnfoldLimit limit) {
  if (!limit.max_transitions && !limit.max_depth) throw input_error("unfolding needs a finite limit");
  UnfoldResult res{BranchingProcess(base), {}, false};
  BranchingProcess& bp = res.bp;
  std::vector<std::size_t> depth;  // per place
  for (PlaceId b : base->initial()) {
    bp.add_initial(b);
    depth.push_back(0);
  }
  Causality cz(bp);
  auto inst = detail::instances_by_image(bp);
  bool stopped = false;
  for (std::size_t d = 1;; ++d) {
    if (limit.max_depth && d > *limit.max_depth) { stopped = true; break; }
    std::vector<std::pair<TransitionId, std::vector<PlaceId>>> cand;
    for (std::size_t i = 0; i < base->transition_count(); ++i) {
      TransitionId t(i);
      std::vector<std::vector<PlaceId>> slots;
      for (PlaceId b : base->pre(t)) slots.push_back(inst[b.index()]);
      detail::for_each_coset(cz, slots, [&](PlaceId p, std::size_t) { return depth[p.index()] < d; },
                             [&](const std::vector<PlaceId>& c) {
                               std::size_t m = 0;
                               for (PlaceId p : c) m = std::max(m, depth[p.index()]);
                               if (m + 1 == d) {
                                 std::vector<PlaceId> s = c;
                                 std::sort(s.begin(), s.end());
                                 cand.emplace_back(t, std::move(s));
                               }
                               return true;
                             });
    }
    if (cand.empty()) { res.complete = true; break; }
    std::sort(cand.begin(), cand.end());
    for (auto& [t, pre] : cand) {
      if (limit.max_transitions && bp.transition_count() >= *limit.max_transitions) { stopped = true; break; }
      TransitionId e = bp.add_event(t, pre);
      for (PlaceId q : bp.occ().post(e)) {
        depth.push_back(d);
        inst[bp.image(q).index()].push_back(q);
      }
      cz.update(bp.occ());
      for (PlaceId q : bp.occ().post(e)) detail::check_safe_place(bp, cz, inst, q);
    }
    if (stopped) break;
  }
  if (stopped) {
    std::set<PlaceId> h;
    for (auto& [t, pre] : possible_extensions(bp, cz)) h.insert(pre.begin(), pre.end());
    res.horizon.assign(h.begin(), h.end());
    res.complete = h.empty();
  }
  return res;
}

inline UnfoldResult unfold(const Net& base, UnfoldLimit limit) {
  return unfold(std::make_shared<const Net>(base), limit);
}

inline BranchingProcess unfold_prefix(const Net& base, UnfoldLimit limit) { return unfold(base, limit).bp; }

// ---------------------------------------------------------------------------
// cuts

namespace detail {
// concurrency graph over places as adjacency bitsets
inline std::vector<Bitset> concurrency_graph(const BranchingProcess& bp, const Causality& cz) {
  std::size_t n = bp.place_count();
  std::vector<Bitset> adj(n, Bitset(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (cz.concurrent(PlaceId(i), PlaceId(j))) {
        adj[i].set(j);
        adj[j].set(i);
      }
  return adj;
}
}  // namespace detail

inline constexpr std::size_t default_cut_cap = 2'000'000;

// Cuts as maximal sets of pairwise concurrent places (maximal cliques of the
// concurrency graph), sorted.
inline std::vector<Cut> cuts(const BranchingProcess& bp, const Causality& cz, std::size_t cap = default_cut_cap) {
  auto adj = detail::concurrency_graph(bp, cz);
  std::size_t n = bp.place_count();
  std::vector<Cut> out;
  std::vector<PlaceId> r;
  std::function<void(Bitset, Bitset)> bk = [&](Bitset p, Bitset x) {
    if (p.none() && x.none()) {
      if (out.size() >= cap) throw overflow_error("cut enumeration exceeds cap " + std::to_string(cap));
      out.emplace_back(r);
      return;
    }
    // pivot maximising |P ∩ N(u)|
    std::size_t pivot = Bitset::npos, best = 0;
    auto consider = [&](std::size_t u) {
      Bitset s = p;
      s &= adj[u];
      std::size_t c = s.count();
      if (pivot == Bitset::npos || c > best) { pivot = u; best = c; }
    };
    p.for_each(consider);
    x.for_each(consider);
    Bitset cand = p;
    cand.subtract(adj[pivot]);
    cand.for_each([&](std::size_t v) {
      Bitset np = p, nx = x;
      np &= adj[v];
      nx &= adj[v];
      r.push_back(PlaceId(v));
      bk(std::move(np), std::move(nx));
      r.pop_back();
      p.reset(v);
      x.set(v);
    });
  };
  if (n == 0) return {Cut{}};
  Bitset all(n);
  for (std::size_t i = 0; i < n; ++i) all.set(i);
  bk(all, Bitset(n));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Cut> cuts(const BranchingProcess& bp, std::size_t cap = default_cut_cap) {
  return cuts(bp, Causality(bp), cap);
}

inline bool is_cut(const BranchingProcess& bp, const Causality& cz, const Cut& c) {
  for (PlaceId p : c)
    if (!bp.occ().has(p)) return false;
  if (!cz.is_coset(c)) return false;
  for (std::size_t i = 0; i < bp.place_count(); ++i) {
    PlaceId q(i);
    if (c.contains(q)) continue;
    bool all = true;
    for (PlaceId p : c)
      if (!cz.concurrent(p, q)) { all = false; break; }
    if (all) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// local configuration cut and marking

inline Cut lkc(const BranchingProcess& bp, const Causality& cz, TransitionId t) {
  const Bitset& h = cz.hist(t);
  const Net& occ = bp.occ();
  std::vector<PlaceId> out;
  for (std::size_t i = 0; i < occ.place_count(); ++i) {
    PlaceId p(i);
    bool produced = occ.is_initial(p);
    for (TransitionId u : occ.producers(p))
      if (h.test(u.index())) produced = true;
    if (!produced) continue;
    bool consumed = false;
    for (TransitionId u : occ.consumers(p))
      if (h.test(u.index())) consumed = true;
    if (!consumed) out.push_back(p);
  }
  return Cut(std::move(out));
}
inline Cut lkc(const BranchingProcess& bp, TransitionId t) { return lkc(bp, Causality(bp), t); }

inline Marking lkm(const BranchingProcess& bp, const Causality& cz, TransitionId t) {
  return bp.image(lkc(bp, cz, t));
}
inline Marking lkm(const BranchingProcess& bp, TransitionId t) { return lkm(bp, Causality(bp), t); }

// ---------------------------------------------------------------------------
// futures, subtraction and gluing

struct NodeSet {
  Bitset places, transitions;
  bool has(PlaceId p) const { return places.test(p.index()); }
  bool has(TransitionId t) const { return transitions.test(t.index()); }
};

// nodes x with p ≤ x or p || x for every p in c
inline NodeSet future_nodes(const BranchingProcess& bp, const Causality& cz, const Cut& c) {
  NodeSet s;
  auto in = [&](Node x) {
    for (PlaceId p : c) {
      Relation r = cz.classify(p, x);
      if (r != Relation::equal && r != Relation::causal_le && r != Relation::concurrent) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < bp.place_count(); ++i)
    if (in(PlaceId(i))) s.places.set(i);
  for (std::size_t i = 0; i < bp.transition_count(); ++i)
    if (in(TransitionId(i))) s.transitions.set(i);
  return s;
}

namespace detail {
// copies the selected nodes into a new process over base, keeping uids,
// labels and instances; arcs to unselected places become dangling
inline BranchingProcess restrict_to(const BranchingProcess& bp, const NodeSet& keep,
                                    std::shared_ptr<const Net> base, const std::function<bool(PlaceId)>& initial,
                                    std::vector<PlaceId>* place_map = nullptr,
                                    std::vector<TransitionId>* transition_map = nullptr) {
  BranchingProcess out(std::move(base));
  out.reserve_uids(bp.next_uid());
  const Net& occ = bp.occ();
  std::vector<PlaceId> pm(bp.place_count());
  std::vector<TransitionId> tm(bp.transition_count());
  for (std::size_t i = 0; i < bp.place_count(); ++i) {
    PlaceId p(i);
    if (keep.has(p)) pm[i] = out.add_place(bp.image(p), occ.label(p), initial(p), bp.uid(p), bp.instance(p));
  }
  for (std::size_t i = 0; i < bp.transition_count(); ++i) {
    TransitionId t(i);
    if (!keep.has(t)) continue;
    std::vector<PlaceId> pre, post;
    BranchingProcess::Dangling d = bp.dangling(t);
    for (PlaceId p : occ.pre(t)) {
      if (pm[p.index()].valid()) pre.push_back(pm[p.index()]);
      else d.pre.push_back(bp.uid(p));
    }
    for (PlaceId p : occ.post(t)) {
      if (pm[p.index()].valid()) post.push_back(pm[p.index()]);
      else d.post.push_back(bp.uid(p));
    }
    tm[i] = out.add_transition(bp.image(t), occ.label(t), std::move(pre), std::move(post), bp.uid(t),
                               bp.instance(t));
    out.set_dangling(tm[i], std::move(d));
  }
  if (place_map) *place_map = std::move(pm);
  if (transition_map) *transition_map = std::move(tm);
  return out;
}

inline std::shared_ptr<const Net> rebase(const Net& base, Marking initial) {
  auto n = std::make_shared<Net>(base);
  n->set_initial(std::move(initial));
  return n;
}
}  // namespace detail

// Fut(bp, c) as a process over the base net rebased to initial marking π(c).
inline BranchingProcess future(const BranchingProcess& bp, const Causality& cz, const Cut& c) {
  if (!is_cut(bp, cz, c)) throw input_error("future needs a cut");
  NodeSet s = future_nodes(bp, cz, c);
  return detail::restrict_to(bp, s, detail::rebase(bp.base(), bp.image(c)), [&](PlaceId p) { return c.contains(p); });
}
inline BranchingProcess future(const BranchingProcess& bp, const Cut& c) { return future(bp, Causality(bp), c); }

// b − sub: drops the transitions of sub and its places outside its initial
// marking, matched by uid; arcs into dropped places become dangling
inline BranchingProcess subtract(const BranchingProcess& b, const BranchingProcess& sub) {
  std::set<std::uint64_t> drop_t, drop_p;
  for (std::size_t i = 0; i < sub.transition_count(); ++i) drop_t.insert(sub.uid(TransitionId(i)));
  for (std::size_t i = 0; i < sub.place_count(); ++i)
    if (!sub.occ().is_initial(PlaceId(i))) drop_p.insert(sub.uid(PlaceId(i)));
  NodeSet keep;
  for (std::size_t i = 0; i < b.place_count(); ++i)
    if (!drop_p.count(b.uid(PlaceId(i)))) keep.places.set(i);
  for (std::size_t i = 0; i < b.transition_count(); ++i)
    if (!drop_t.count(b.uid(TransitionId(i)))) keep.transitions.set(i);
  return detail::restrict_to(b, keep, b.base_ptr(), [&](PlaceId p) { return b.occ().is_initial(p); });
}

// b + add: union by uid; the initial places of add must form a cut of b
inline BranchingProcess glue(const BranchingProcess& b, const BranchingProcess& add) {
  if (add.base().place_count() != b.base().place_count() ||
      add.base().transition_count() != b.base().transition_count())
    throw input_error("glue needs processes over the same base net");
  std::vector<PlaceId> in;
  for (PlaceId p : add.occ().initial()) {
    auto q = b.find_place_uid(add.uid(p));
    if (!q) throw input_error("glue: initial place of the glued process is not in the target");
    in.push_back(*q);
  }
  if (!is_cut(b, Causality(b), Cut(in))) throw input_error("glue: initial places do not form a cut");
  NodeSet all;
  for (std::size_t i = 0; i < b.place_count(); ++i) all.places.set(i);
  for (std::size_t i = 0; i < b.transition_count(); ++i) all.transitions.set(i);
  std::vector<PlaceId> pm;
  BranchingProcess out =
      detail::restrict_to(b, all, b.base_ptr(), [&](PlaceId p) { return b.occ().is_initial(p); }, &pm);
  out.reserve_uids(add.next_uid());
  std::map<std::uint64_t, PlaceId> by_uid;
  for (std::size_t i = 0; i < out.place_count(); ++i) by_uid[out.uid(PlaceId(i))] = PlaceId(i);
  for (std::size_t i = 0; i < add.place_count(); ++i) {
    PlaceId p(i);
    if (by_uid.count(add.uid(p))) continue;
    by_uid[add.uid(p)] = out.add_place(add.image(p), add.occ().label(p), false, add.uid(p), add.instance(p));
  }
  std::set<std::uint64_t> have_t;
  for (std::size_t i = 0; i < out.transition_count(); ++i) have_t.insert(out.uid(TransitionId(i)));
  for (std::size_t i = 0; i < add.transition_count(); ++i) {
    TransitionId t(i);
    if (have_t.count(add.uid(t))) continue;
    std::vector<PlaceId> pre, post;
    for (PlaceId p : add.occ().pre(t)) pre.push_back(by_uid.at(add.uid(p)));
    for (PlaceId p : add.occ().post(t)) post.push_back(by_uid.at(add.uid(p)));
    out.add_transition(add.image(t), add.occ().label(t), std::move(pre), std::move(post), add.uid(t),
                       add.instance(t));
  }
  // reattach arcs that dangled in b
  bool any = false;
  for (std::size_t i = 0; i < out.transition_count(); ++i)
    if (!out.dangling(TransitionId(i)).empty()) any = true;
  if (!any) return out;
  BranchingProcess fixed(out.base_ptr());
  fixed.reserve_uids(out.next_uid());
  for (std::size_t i = 0; i < out.place_count(); ++i) {
    PlaceId p(i);
    fixed.add_place(out.image(p), out.occ().label(p), out.occ().is_initial(p), out.uid(p), out.instance(p));
  }
  for (std::size_t i = 0; i < out.transition_count(); ++i) {
    TransitionId t(i);
    auto pre = std::vector<PlaceId>(out.occ().pre(t).begin(), out.occ().pre(t).end());
    auto post = std::vector<PlaceId>(out.occ().post(t).begin(), out.occ().post(t).end());
    BranchingProcess::Dangling rest;
    for (auto u : out.dangling(t).pre) {
      if (by_uid.count(u)) pre.push_back(by_uid[u]); else rest.pre.push_back(u);
    }
    for (auto u : out.dangling(t).post) {
      if (by_uid.count(u)) post.push_back(by_uid[u]); else rest.post.push_back(u);
    }
    std::sort(pre.begin(), pre.end());
    TransitionId n = fixed.add_transition(out.image(t), out.occ().label(t), pre, post, out.uid(t), out.instance(t));
    fixed.set_dangling(n, std::move(rest));
  }
  return fixed;
}

// equality of node sets and arcs, matching nodes by uid
inline bool same_process(const BranchingProcess& a, const BranchingProcess& b) {
  using PKey = std::tuple<std::uint64_t, PlaceId, bool>;
  using TKey = std::tuple<std::uint64_t, TransitionId, std::vector<std::uint64_t>, std::vector<std::uint64_t>>;
  auto pkeys = [](const BranchingProcess& x) {
    std::set<PKey> s;
    for (std::size_t i = 0; i < x.place_count(); ++i)
      s.emplace(x.uid(PlaceId(i)), x.image(PlaceId(i)), x.occ().is_initial(PlaceId(i)));
    return s;
  };
  auto tkeys = [](const BranchingProcess& x) {
    std::set<TKey> s;
    for (std::size_t i = 0; i < x.transition_count(); ++i) {
      TransitionId t(i);
      std::vector<std::uint64_t> pre = x.dangling(t).pre, post = x.dangling(t).post;
      for (PlaceId p : x.occ().pre(t)) pre.push_back(x.uid(p));
      for (PlaceId p : x.occ().post(t)) post.push_back(x.uid(p));
      std::sort(pre.begin(), pre.end());
      std::sort(post.begin(), post.end());
      s.emplace(x.uid(t), x.image(t), pre, post);
    }
    return s;
  };
  return pkeys(a) == pkeys(b) && tkeys(a) == tkeys(b);
}

struct GlueResult {
  BranchingProcess bp;
  // old id -> new id of the kept nodes, invalid if removed
  std::vector<PlaceId> kept_place;
  std::vector<TransitionId> kept_transition;
  // old id -> new id of the copy of Fut(c1), invalid if not copied
  std::vector<PlaceId> copy_place;
  std::vector<TransitionId> copy_transition;
};

// bp − Fut(c2) + Fut(c1)', where the copy identifies c1 with c2 through
// equal images. Nodes that causally depend on removed nodes go too; the
// dependents of Fut(c1) are copied along wherever their presets form a
// co-set of the result.
inline NodeSet future_closure(const BranchingProcess& bp, const Causality& cz, const Cut& c, const NodeSet& f) {
  const Net& occ = bp.occ();
  NodeSet gone;
  for (TransitionId t : cz.topological_order()) {
    bool g = f.has(t);
    for (PlaceId p : occ.pre(t))
      if (gone.has(p)) g = true;
    if (g) {
      gone.transitions.set(t.index());
      for (PlaceId q : occ.post(t)) gone.places.set(q.index());
    }
  }
  for (std::size_t i = 0; i < bp.place_count(); ++i)
    if (f.has(PlaceId(i)) && !c.contains(PlaceId(i))) gone.places.set(i);
  return gone;
}

inline GlueResult cut_and_glue_detailed(const BranchingProcess& bp, const Causality& cz, const Cut& c1,
                                        const Cut& c2) {
  if (!is_cut(bp, cz, c1) || !is_cut(bp, cz, c2)) throw input_error("cut_and_glue needs two cuts");
  if (bp.image(c1) != bp.image(c2)) throw input_error("cut_and_glue needs cuts with equal markings");
  NodeSet f1 = future_nodes(bp, cz, c1);
  NodeSet f2 = future_nodes(bp, cz, c2);
  const Net& occ = bp.occ();

  NodeSet gone = future_closure(bp, cz, c2, f2);
  NodeSet region = future_closure(bp, cz, c1, f1);
  NodeSet keep;
  for (std::size_t i = 0; i < bp.place_count(); ++i)
    if (!gone.has(PlaceId(i))) keep.places.set(i);
  for (std::size_t i = 0; i < bp.transition_count(); ++i)
    if (!gone.has(TransitionId(i))) keep.transitions.set(i);

  GlueResult res;
  res.bp = detail::restrict_to(bp, keep, bp.base_ptr(), [&](PlaceId p) { return occ.is_initial(p); },
                               &res.kept_place, &res.kept_transition);
  BranchingProcess& out = res.bp;
  res.copy_place.assign(bp.place_count(), PlaceId());
  res.copy_transition.assign(bp.transition_count(), TransitionId());
  std::map<PlaceId, PlaceId> by_image;
  for (PlaceId p : c2) by_image[bp.image(p)] = res.kept_place[p.index()];
  for (PlaceId p : c1) res.copy_place[p.index()] = by_image.at(bp.image(p));
  auto have = detail::event_index(out);
  Causality ocz(out);
  for (TransitionId t : cz.topological_order()) {
    if (!region.has(t)) continue;
    bool inner = f1.has(t);
    std::vector<PlaceId> pre;
    bool ok = true;
    for (PlaceId p : occ.pre(t)) {
      PlaceId m = res.copy_place[p.index()];
      if (!m.valid() && !inner && !region.has(p)) m = res.kept_place[p.index()];
      if (!m.valid()) { ok = false; break; }
      pre.push_back(m);
    }
    if (!ok) continue;
    std::sort(pre.begin(), pre.end());
    if (!inner && (!ocz.is_coset(pre) || have.count({bp.image(t), pre}))) continue;
    std::vector<PlaceId> post;
    for (PlaceId q : occ.post(t)) {
      PlaceId n = out.add_place(bp.image(q), "", false);
      res.copy_place[q.index()] = n;
      post.push_back(n);
    }
    res.copy_transition[t.index()] = out.add_transition(bp.image(t), "", pre, std::move(post));
    have.insert({bp.image(t), pre});
    ocz.update(out.occ());
  }
  return res;
}

inline BranchingProcess cut_and_glue(const BranchingProcess& bp, const Cut& c1, const Cut& c2) {
  return cut_and_glue_detailed(bp, Causality(bp), c1, c2).bp;
}

// ---------------------------------------------------------------------------
// canonical forms and isomorphism

// Interns node keys. A place key is (0, image, producer key); a transition
// key is (1, image, sorted preset keys). Equal ids mean equal subtrees.
class KeyTable {
 public:
  std::uint32_t intern(std::vector<std::uint32_t> key) {
    auto [it, fresh] = table_.emplace(std::move(key), static_cast<std::uint32_t>(table_.size()));
    return it->second;
  }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::vector<std::uint32_t>, std::uint32_t> table_;
};

struct CanonicalKeys {
  std::vector<std::uint32_t> place, transition;

  std::vector<std::uint32_t> multiset() const {
    std::vector<std::uint32_t> all = place;
    all.insert(all.end(), transition.begin(), transition.end());
    std::sort(all.begin(), all.end());
    return all;
  }
  bool unique() const {
    auto m = multiset();
    return std::adjacent_find(m.begin(), m.end()) == m.end();
  }
};

inline constexpr std::uint32_t no_key = std::numeric_limits<std::uint32_t>::max();

inline CanonicalKeys canonical_keys(const BranchingProcess& bp, const Causality& cz, KeyTable& table) {
  const Net& occ = bp.occ();
  CanonicalKeys k;
  k.place.assign(bp.place_count(), no_key);
  k.transition.assign(bp.transition_count(), no_key);
  auto place_key = [&](PlaceId p) {
    std::vector<std::uint32_t> key{0, bp.image(p).value()};
    if (occ.is_initial(p)) key.push_back(no_key);
    std::vector<std::uint32_t> parents;
    for (TransitionId u : occ.producers(p)) parents.push_back(k.transition[u.index()]);
    std::sort(parents.begin(), parents.end());
    key.insert(key.end(), parents.begin(), parents.end());
    return table.intern(std::move(key));
  };
  for (std::size_t i = 0; i < bp.place_count(); ++i)
    if (occ.producers(PlaceId(i)).empty()) k.place[i] = place_key(PlaceId(i));
  for (TransitionId t : cz.topological_order()) {
    std::vector<std::uint32_t> key{1, bp.image(t).value()};
    std::vector<std::uint32_t> pre;
    for (PlaceId p : occ.pre(t)) pre.push_back(k.place[p.index()]);
    std::sort(pre.begin(), pre.end());
    key.insert(key.end(), pre.begin(), pre.end());
    k.transition[t.index()] = table.intern(std::move(key));
    for (PlaceId q : occ.post(t)) {
      bool ready = true;
      for (TransitionId u : occ.producers(q))
        if (k.transition[u.index()] == no_key) ready = false;
      if (ready) k.place[q.index()] = place_key(q);
    }
  }
  return k;
}

namespace detail {

// Backtracking search for an isomorphism. Used when canonical keys collide,
// which only happens for processes that violate the process axioms.
inline bool match_isomorphism(const BranchingProcess& a, const BranchingProcess& b) {
  if (a.place_count() != b.place_count() || a.transition_count() != b.transition_count()) return false;
  const Net& x = a.occ();
  const Net& y = b.occ();
  std::vector<PlaceId> pm(a.place_count());
  std::vector<bool> pused(b.place_count(), false), tused(b.transition_count(), false);
  std::vector<TransitionId> order;
  try {
    order = Causality(a).topological_order();
    Causality check_b(b);
  } catch (const input_error&) {
    return false;
  }
  std::vector<PlaceId> ainit(x.initial().begin(), x.initial().end());
  std::function<bool(std::size_t)> trans;
  std::function<bool(std::size_t, const std::vector<PlaceId>&, const std::vector<PlaceId>&, std::size_t,
                     const std::function<bool()>&)>
      map_places = [&](std::size_t i, const std::vector<PlaceId>& from, const std::vector<PlaceId>& to,
                       std::size_t, const std::function<bool()>& next) -> bool {
    if (i == from.size()) return next();
    for (PlaceId q : to) {
      if (pused[q.index()] || b.image(q) != a.image(from[i])) continue;
      pused[q.index()] = true;
      pm[from[i].index()] = q;
      if (map_places(i + 1, from, to, 0, next)) return true;
      pused[q.index()] = false;
      pm[from[i].index()] = PlaceId();
    }
    return false;
  };
  trans = [&](std::size_t k) -> bool {
    if (k == order.size()) {
      return std::all_of(pused.begin(), pused.end(), [](bool u) { return u; }) &&
             std::all_of(tused.begin(), tused.end(), [](bool u) { return u; });
    }
    TransitionId t = order[k];
    std::vector<PlaceId> want;
    for (PlaceId p : x.pre(t)) want.push_back(pm[p.index()]);
    std::sort(want.begin(), want.end());
    for (std::size_t j = 0; j < b.transition_count(); ++j) {
      TransitionId u(j);
      if (tused[j] || b.image(u) != a.image(t)) continue;
      std::vector<PlaceId> have(y.pre(u).begin(), y.pre(u).end());
      std::sort(have.begin(), have.end());
      if (have != want || x.post(t).size() != y.post(u).size()) continue;
      tused[j] = true;
      std::vector<PlaceId> from(x.post(t).begin(), x.post(t).end());
      std::vector<PlaceId> to(y.post(u).begin(), y.post(u).end());
      if (map_places(0, from, to, 0, [&] { return trans(k + 1); })) return true;
      tused[j] = false;
    }
    return false;
  };
  std::vector<PlaceId> binit(y.initial().begin(), y.initial().end());
  if (ainit.size() != binit.size()) return false;
  // places without producers that are not initial
  std::vector<PlaceId> aorph, borph;
  for (std::size_t i = 0; i < a.place_count(); ++i)
    if (x.producers(PlaceId(i)).empty() && !x.is_initial(PlaceId(i))) aorph.push_back(PlaceId(i));
  for (std::size_t i = 0; i < b.place_count(); ++i)
    if (y.producers(PlaceId(i)).empty() && !y.is_initial(PlaceId(i))) borph.push_back(PlaceId(i));
  return map_places(0, ainit, binit, 0, [&] { return map_places(0, aorph, borph, 0, [&] { return trans(0); }); });
}

inline void require_same_base(const BranchingProcess& a, const BranchingProcess& b) {
  if (!(a.base() == b.base())) throw input_error("processes are over different base nets");
}

}  // namespace detail

inline bool is_isomorphic(const BranchingProcess& a, const BranchingProcess& b) {
  detail::require_same_base(a, b);
  if (a.place_count() != b.place_count() || a.transition_count() != b.transition_count()) return false;
  KeyTable table;
  CanonicalKeys ka, kb;
  try {
    ka = canonical_keys(a, Causality(a), table);
    kb = canonical_keys(b, Causality(b), table);
  } catch (const input_error&) {
    return detail::match_isomorphism(a, b);
  }
  if (ka.multiset() != kb.multiset()) return false;
  if (ka.unique() && kb.unique()) return true;
  return detail::match_isomorphism(a, b);
}

// a is isomorphic to a subprocess of b with the same initial marking;
// exact for processes satisfying the process axioms
inline bool is_subprocess(const BranchingProcess& a, const BranchingProcess& b) {
  detail::require_same_base(a, b);
  KeyTable table;
  auto ka = canonical_keys(a, Causality(a), table);
  auto kb = canonical_keys(b, Causality(b), table);
  if (!ka.unique() || !kb.unique()) throw unsupported_error("subprocess test needs valid processes");
  auto ma = ka.multiset();
  auto mb = kb.multiset();
  if (a.occ().initial().size() != b.occ().initial().size()) return false;
  return std::includes(mb.begin(), mb.end(), ma.begin(), ma.end());
}

}  // namespace pgame
