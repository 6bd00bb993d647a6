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

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pgame {

// ---------------------------------------------------------------------------
// errors

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// malformed input: bad ids, malformed files, mismatched nets
struct input_error : error {
  using error::error;
};

// firing a transition that is not enabled
struct firing_error : error {
  using error::error;
};

// a state space or enumeration exceeded its cap
struct overflow_error : error {
  using error::error;
};

// request outside the supported fragment
struct unsupported_error : error {
  using error::error;
};

template <class Tag>
class Id {
 public:
  using value_type = std::uint32_t;
  static constexpr value_type invalid = std::numeric_limits<value_type>::max();

  constexpr Id() = default;
  template <std::integral I>
  constexpr explicit Id(I v) : value_(static_cast<value_type>(v)) {}

  constexpr value_type value() const { return value_; }
  constexpr std::size_t index() const { return value_; }
  constexpr bool valid() const { return value_ != invalid; }

  friend constexpr auto operator<=>(Id, Id) = default;

 private:
  value_type value_ = invalid;
};

struct PlaceTag {};
struct TransitionTag {};
using PlaceId = Id<PlaceTag>;
using TransitionId = Id<TransitionTag>;

// unsafe firing; carries the firing sequence from the initial marking whose
// last step puts a second token on a place
struct safety_error : error {
  safety_error(const std::string& what, std::vector<TransitionId> seq)
      : error(what), witness(std::move(seq)) {}
  std::vector<TransitionId> witness;
};

// ---------------------------------------------------------------------------
// markings

// A marking of a safe net: a set of places, kept sorted.
class Marking {
 public:
  Marking() = default;
  Marking(std::initializer_list<PlaceId> ps) : places_(ps) { normalize(); }
  explicit Marking(std::vector<PlaceId> ps) : places_(std::move(ps)) { normalize(); }

  bool contains(PlaceId p) const { return std::binary_search(places_.begin(), places_.end(), p); }
  // this ⊇ o
  bool includes(const Marking& o) const {
    return std::includes(places_.begin(), places_.end(), o.places_.begin(), o.places_.end());
  }
  template <class Range>
  bool includes_all(const Range& r) const {
    for (PlaceId p : r)
      if (!contains(p)) return false;
    return true;
  }

  void insert(PlaceId p) {
    auto it = std::lower_bound(places_.begin(), places_.end(), p);
    if (it == places_.end() || *it != p) places_.insert(it, p);
  }
  void erase(PlaceId p) {
    auto it = std::lower_bound(places_.begin(), places_.end(), p);
    if (it != places_.end() && *it == p) places_.erase(it);
  }

  std::size_t size() const { return places_.size(); }
  bool empty() const { return places_.empty(); }
  auto begin() const { return places_.begin(); }
  auto end() const { return places_.end(); }
  std::span<const PlaceId> places() const { return places_; }
  const std::vector<PlaceId>& vec() const { return places_; }

  friend auto operator<=>(const Marking&, const Marking&) = default;
  friend bool operator==(const Marking&, const Marking&) = default;

 private:
  void normalize() {
    std::sort(places_.begin(), places_.end());
    places_.erase(std::unique(places_.begin(), places_.end()), places_.end());
  }
  std::vector<PlaceId> places_;
};

// ---------------------------------------------------------------------------
// nets

class Net {
 public:
  PlaceId add_place(std::string label, bool initial = false) {
    PlaceId id(places_.size());
    places_.push_back({std::move(label), {}, {}});
    if (initial) initial_.insert(id);
    return id;
  }

  // pre and post keep the given order; ids must refer to existing places
  TransitionId add_transition(std::string label, std::vector<PlaceId> pre, std::vector<PlaceId> post) {
    for (PlaceId p : pre) check(p);
    for (PlaceId p : post) check(p);
    TransitionId id(transitions_.size());
    for (PlaceId p : pre) push_unique(places_[p.index()].consumers, id);
    for (PlaceId p : post) push_unique(places_[p.index()].producers, id);
    transitions_.push_back({std::move(label), std::move(pre), std::move(post)});
    return id;
  }

  void set_initial(Marking m) {
    for (PlaceId p : m) check(p);
    initial_ = std::move(m);
  }
  void set_initial_flag(PlaceId p, bool on) {
    check(p);
    if (on) initial_.insert(p); else initial_.erase(p);
  }

  std::size_t place_count() const { return places_.size(); }
  std::size_t transition_count() const { return transitions_.size(); }

  const std::string& label(PlaceId p) const { return places_.at(p.index()).label; }
  const std::string& label(TransitionId t) const { return transitions_.at(t.index()).label; }
  std::span<const PlaceId> pre(TransitionId t) const { return transitions_.at(t.index()).pre; }
  std::span<const PlaceId> post(TransitionId t) const { return transitions_.at(t.index()).post; }
  std::span<const TransitionId> producers(PlaceId p) const { return places_.at(p.index()).producers; }
  std::span<const TransitionId> consumers(PlaceId p) const { return places_.at(p.index()).consumers; }
  const Marking& initial() const { return initial_; }
  bool is_initial(PlaceId p) const { return initial_.contains(p); }

  bool has(PlaceId p) const { return p.index() < places_.size(); }
  bool has(TransitionId t) const { return t.index() < transitions_.size(); }

  std::optional<PlaceId> find_place(std::string_view label) const {
    for (std::size_t i = 0; i < places_.size(); ++i)
      if (places_[i].label == label) return PlaceId(i);
    return std::nullopt;
  }
  std::optional<TransitionId> find_transition(std::string_view label) const {
    for (std::size_t i = 0; i < transitions_.size(); ++i)
      if (transitions_[i].label == label) return TransitionId(i);
    return std::nullopt;
  }
  PlaceId place(std::string_view label) const {
    if (auto p = find_place(label)) return *p;
    throw input_error("unknown place '" + std::string(label) + "'");
  }
  TransitionId transition(std::string_view label) const {
    if (auto t = find_transition(label)) return *t;
    throw input_error("unknown transition '" + std::string(label) + "'");
  }

  // structural equality, id by id
  friend bool operator==(const Net& a, const Net& b) {
    if (a.places_.size() != b.places_.size() || a.transitions_.size() != b.transitions_.size()) return false;
    if (a.initial_ != b.initial_) return false;
    for (std::size_t i = 0; i < a.places_.size(); ++i)
      if (a.places_[i].label != b.places_[i].label) return false;
    for (std::size_t i = 0; i < a.transitions_.size(); ++i) {
      const auto& x = a.transitions_[i];
      const auto& y = b.transitions_[i];
      if (x.label != y.label || x.pre != y.pre || x.post != y.post) return false;
    }
    return true;
  }

 private:
  struct PlaceData {
    std::string label;
    std::vector<TransitionId> producers, consumers;
  };
  struct TransitionData {
    std::string label;
    std::vector<PlaceId> pre, post;
  };

  void check(PlaceId p) const {
    if (p.index() >= places_.size()) throw input_error("place id out of range");
  }
  static void push_unique(std::vector<TransitionId>& v, TransitionId t) {
    if (std::find(v.begin(), v.end(), t) == v.end()) v.push_back(t);
  }

  std::vector<PlaceData> places_;
  std::vector<TransitionData> transitions_;
  Marking initial_;
};

// ---------------------------------------------------------------------------
// validation

struct Violation {
  std::string rule;
  std::vector<std::string> nodes;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view rule) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; });
  }
  void add(std::string rule, std::vector<std::string> nodes = {}) {
    violations.push_back({std::move(rule), std::move(nodes)});
  }
  void merge(const ValidationReport& o) {
    violations.insert(violations.end(), o.violations.begin(), o.violations.end());
  }
};

inline ValidationReport validate_net(const Net& net) {
  ValidationReport r;
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < net.place_count(); ++i) {
    const auto& l = net.label(PlaceId(i));
    if (l.empty()) r.add("empty label", {"place #" + std::to_string(i)});
    else if (seen[l]++ == 1) r.add("duplicate label", {l});
  }
  std::map<std::string, int> tseen;
  for (std::size_t i = 0; i < net.transition_count(); ++i) {
    TransitionId t(i);
    const auto& l = net.label(t);
    if (l.empty()) r.add("empty label", {"transition #" + std::to_string(i)});
    else {
      if (tseen[l]++ == 1) r.add("duplicate label", {l});
      if (seen.count(l)) r.add("place and transition share a label", {l});
    }
    if (net.pre(t).empty()) r.add("empty preset", {l});
    auto dup = [](std::span<const PlaceId> s) {
      std::vector<PlaceId> v(s.begin(), s.end());
      std::sort(v.begin(), v.end());
      return std::adjacent_find(v.begin(), v.end()) != v.end();
    };
    if (dup(net.pre(t))) r.add("duplicate arc", {l, "pre"});
    if (dup(net.post(t))) r.add("duplicate arc", {l, "post"});
  }
  return r;
}

// ---------------------------------------------------------------------------
// firing

namespace detail {
inline void check_marking(const Net& net, const Marking& m) {
  for (PlaceId p : m)
    if (!net.has(p)) throw input_error("marking refers to an unknown place");
}
}  // namespace detail

inline bool is_enabled(const Net& net, const Marking& m, TransitionId t) {
  if (!net.has(t)) throw input_error("unknown transition id");
  return m.includes_all(net.pre(t));
}

inline std::vector<TransitionId> enabled(const Net& net, const Marking& m) {
  detail::check_marking(net, m);
  std::vector<TransitionId> out;
  for (std::size_t i = 0; i < net.transition_count(); ++i)
    if (m.includes_all(net.pre(TransitionId(i)))) out.push_back(TransitionId(i));
  return out;
}

// (M \ pre(t)) ∪ post(t); throws safety_error if a post place is still marked
inline Marking fire(const Net& net, const Marking& m, TransitionId t) {
  detail::check_marking(net, m);
  if (!is_enabled(net, m, t)) throw firing_error("transition '" + net.label(t) + "' is not enabled");
  Marking out = m;
  for (PlaceId p : net.pre(t)) out.erase(p);
  for (PlaceId p : net.post(t)) {
    if (out.contains(p))
      throw safety_error("firing '" + net.label(t) + "' puts a second token on '" + net.label(p) + "'", {t});
    out.insert(p);
  }
  return out;
}

enum class Exploration { breadth_first, depth_first };

inline constexpr std::size_t default_state_cap = 1'000'000;

// All markings reachable from the initial marking. Throws safety_error with
// a witness sequence if the net is unsafe, overflow_error beyond cap.
inline std::set<Marking> reachable_markings(const Net& net, std::size_t cap = default_state_cap,
                                            Exploration order = Exploration::breadth_first) {
  struct Entry {
    Marking m;
    std::size_t parent;
    TransitionId via;
  };
  std::vector<Entry> nodes;
  std::map<Marking, std::size_t> index;
  std::deque<std::size_t> work;
  auto trace = [&](std::size_t n) {
    std::vector<TransitionId> seq;
    while (nodes[n].via.valid()) {
      seq.push_back(nodes[n].via);
      n = nodes[n].parent;
    }
    std::reverse(seq.begin(), seq.end());
    return seq;
  };
  nodes.push_back({net.initial(), 0, TransitionId()});
  index.emplace(net.initial(), 0);
  work.push_back(0);
  while (!work.empty()) {
    std::size_t n;
    if (order == Exploration::breadth_first) { n = work.front(); work.pop_front(); }
    else { n = work.back(); work.pop_back(); }
    Marking m = nodes[n].m;
    for (TransitionId t : enabled(net, m)) {
      Marking next;
      try {
        next = fire(net, m, t);
      } catch (const safety_error& e) {
        auto seq = trace(n);
        seq.push_back(t);
        throw safety_error(e.what(), std::move(seq));
      }
      if (index.count(next)) continue;
      if (nodes.size() >= cap) throw overflow_error("reachable markings exceed cap " + std::to_string(cap));
      index.emplace(next, nodes.size());
      nodes.push_back({std::move(next), n, t});
      work.push_back(nodes.size() - 1);
    }
  }
  std::set<Marking> out;
  for (auto& e : nodes) out.insert(std::move(e.m));
  return out;
}

// largest number of tokens in any reachable marking
inline std::size_t max_tokens(const Net& net, std::size_t cap = default_state_cap) {
  std::size_t k = 0;
  for (const auto& m : reachable_markings(net, cap)) k = std::max(k, m.size());
  return k;
}

}  // namespace pgame

template <class Tag>
struct std::hash<pgame::Id<Tag>> {
  std::size_t operator()(pgame::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value()); }
};
