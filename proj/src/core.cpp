#include "awb/core.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>

#include "awb/error.hpp"

namespace awb {

using detail::AutomatonData;
using detail::Origin;

bool is_behaviour(const Automaton& a, const Behaviour& b) {
  if (b.start >= a.num_states()) return false;
  StateId at = b.start;
  for (MotionId m : b.steps) {
    if (m >= a.num_motions() || a.source(m) != at) return false;
    at = a.target(m);
  }
  return true;
}

std::vector<ActionId> appearance(const Automaton& a, const Behaviour& b, std::size_t boundary) {
  if (boundary >= a.arity())
    throw InputError("boundary " + std::to_string(boundary) + " out of range for '" + a.name() + "'");
  if (!is_behaviour(a, b)) throw InputError("not a behaviour of '" + a.name() + "'");
  std::vector<ActionId> out;
  out.reserve(b.steps.size());
  for (MotionId m : b.steps) out.push_back(a.label(m, boundary));
  return out;
}

std::vector<ActionId> reduced_appearance(const Automaton& a, const Behaviour& b, std::size_t boundary) {
  auto out = appearance(a, b, boundary);
  std::erase(out, kTau);
  return out;
}

namespace detail {

Automaton make_restriction(const Automaton& a, const std::vector<StateId>& states,
                           const std::vector<char>& keep_motion, std::optional<StateId> initial) {
  // Flatten nested restrictions onto the underlying operand.
  const AutomatonData& ad = a.data();
  const bool nested = ad.origin == Origin::kRestrict;
  const Automaton base = nested ? ad.operands[0] : a;

  auto d = std::make_shared<AutomatonData>();
  d->name = a.name();
  d->signature = a.signature();
  d->origin = Origin::kRestrict;
  d->operands = {base};
  d->leaf_count = base.leaf_count();
  d->num_states = static_cast<StateId>(states.size());

  std::vector<StateId> local(a.num_states(), kNone);
  for (StateId i = 0; i < states.size(); ++i) {
    if (states[i] >= a.num_states()) throw InputError("restriction: state out of range");
    if (i > 0 && states[i] <= states[i - 1]) throw InputError("restriction: states must be ascending");
    local[states[i]] = i;
  }
  if (initial) {
    if (*initial >= a.num_states() || local[*initial] == kNone)
      throw InputError("restriction: initial state not kept");
    d->initial = local[*initial];
  }

  const std::size_t arity = a.arity();
  d->reflexive_of.assign(d->num_states, kNone);
  for (StateId i = 0; i < states.size(); ++i) {
    for (MotionId m : a.out(states[i])) {
      if (!keep_motion[m] || local[a.target(m)] == kNone) continue;
      const MotionId id = d->num_motions();
      if (a.is_reflexive(m)) d->reflexive_of[i] = id;
      d->source.push_back(i);
      d->target.push_back(local[a.target(m)]);
      auto l = a.labels(m);
      d->labels.insert(d->labels.end(), l.begin(), l.begin() + arity);
      d->restrict_motions.push_back(nested ? ad.restrict_motions[m] : m);
    }
    d->restrict_states.push_back(nested ? ad.restrict_states[states[i]] : states[i]);
  }
  d->restrict_state_inverse.assign(base.num_states(), kNone);
  for (StateId i = 0; i < d->num_states; ++i) d->restrict_state_inverse[d->restrict_states[i]] = i;
  d->restrict_motion_inverse.assign(base.num_motions(), kNone);
  for (MotionId m = 0; m < d->num_motions(); ++m) d->restrict_motion_inverse[d->restrict_motions[m]] = m;
  d->index_by_source();
  return Automaton(std::move(d));
}

}  // namespace detail

Automaton restrict_states(const Automaton& a, const std::vector<StateId>& states,
                          std::optional<StateId> initial) {
  return detail::make_restriction(a, states, std::vector<char>(a.num_motions(), 1), initial);
}

std::vector<StateId> reachable_states(const Automaton& a, StateId from) {
  if (from >= a.num_states()) throw InputError("reachable: unknown state in '" + a.name() + "'");
  std::vector<char> seen(a.num_states(), 0);
  std::vector<StateId> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    StateId v = stack.back();
    stack.pop_back();
    for (MotionId m : a.out(v)) {
      StateId w = a.target(m);
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  std::vector<StateId> out;
  for (StateId v = 0; v < a.num_states(); ++v)
    if (seen[v]) out.push_back(v);
  return out;
}

Automaton reachable(const Automaton& a, StateId from) {
  return restrict_states(a, reachable_states(a, from), from);
}

Automaton reachable(const Automaton& a) {
  if (!a.initial()) throw InputError("automaton '" + a.name() + "' has no initial state");
  return reachable(a, *a.initial());
}

bool is_linear(const Automaton& a) {
  for (MotionId m = 0; m < a.num_motions(); ++m)
    if (!a.is_linear(m)) return false;
  return true;
}

std::vector<MotionId> linear_motions(const Automaton& a) {
  std::vector<MotionId> out;
  for (MotionId m = 0; m < a.num_motions(); ++m)
    if (a.is_linear(m)) out.push_back(m);
  return out;
}

Automaton linearize(const Automaton& a) {
  if (is_linear(a)) return a;
  std::vector<StateId> all(a.num_states());
  for (StateId v = 0; v < a.num_states(); ++v) all[v] = v;
  return restrict(a, all, [&](MotionId m) { return a.is_linear(m); }, a.initial());
}

namespace {

// Searches a path of linear motions from source(e) to target(e) performing
// e's nontrivial actions exactly once each, in `order`. Boundaries outside
// the order may each carry at most one nontrivial step.
std::optional<Behaviour> refine(const Automaton& a, MotionId e, const std::vector<std::size_t>& order) {
  const std::size_t arity = a.arity();
  std::vector<int> rank(arity, -1);
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  std::vector<std::size_t> extra_bit(arity, 0);
  std::size_t nbits = 0;
  for (std::size_t i = 0; i < arity; ++i)
    if (rank[i] < 0) extra_bit[i] = nbits++;
  if (nbits > 20) throw InputError("linearizability check: too many boundaries");

  using Key = std::tuple<StateId, std::size_t, std::uint32_t>;
  std::map<Key, std::pair<Key, MotionId>> parent;
  const Key start{a.source(e), 0, 0};
  std::deque<Key> queue{start};
  parent.emplace(start, std::pair{start, kNone});
  const StateId goal = a.target(e);

  while (!queue.empty()) {
    Key k = queue.front();
    queue.pop_front();
    auto [v, pos, mask] = k;
    if (v == goal && pos == order.size()) {
      Behaviour b{a.source(e), {}};
      for (Key at = k; at != start;) {
        auto& [prev, m] = parent.at(at);
        b.steps.push_back(m);
        at = prev;
      }
      std::reverse(b.steps.begin(), b.steps.end());
      return b;
    }
    for (MotionId f : a.out(v)) {
      if (a.is_reflexive(f) || !a.is_linear(f)) continue;
      std::size_t npos = pos;
      std::uint32_t nmask = mask;
      for (std::size_t i = 0; i < arity; ++i) {
        if (a.label(f, i) == kTau) continue;
        if (rank[i] >= 0) {
          if (rank[i] != static_cast<int>(pos) || a.label(f, i) != a.label(e, i)) npos = kNone;
          else ++npos;
        } else {
          const std::uint32_t bit = 1u << extra_bit[i];
          if (mask & bit) npos = kNone;
          nmask |= bit;
        }
      }
      if (npos == kNone) continue;
      Key next{a.target(f), npos, nmask};
      if (parent.emplace(next, std::pair{k, f}).second) queue.push_back(next);
    }
  }
  return std::nullopt;
}

}  // namespace

LinearizabilityResult check_linearizable(const Automaton& a) {
  LinearizabilityResult result;
  for (MotionId e = 0; e < a.num_motions(); ++e) {
    if (a.is_linear(e)) continue;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < a.arity(); ++i)
      if (a.label(e, i) != kTau) order.push_back(i);
    do {
      auto path = refine(a, e, order);
      if (!path) {
        result.linearizable = false;
        result.failure = Refinement{e, order, {a.source(e), {}}};
        return result;
      }
      result.refinements.push_back({e, order, std::move(*path)});
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return result;
}

}  // namespace awb
