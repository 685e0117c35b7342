#pragma once

#include <optional>
#include <vector>

#include "awb/automaton.hpp"

namespace awb {

/// A finite path in the state graph.
struct Behaviour {
  StateId start = 0;
  std::vector<MotionId> steps;

  StateId end(const Automaton& a) const { return steps.empty() ? start : a.target(steps.back()); }
  friend bool operator==(const Behaviour&, const Behaviour&) = default;
};

bool is_behaviour(const Automaton& a, const Behaviour& b);

std::vector<ActionId> appearance(const Automaton& a, const Behaviour& b, std::size_t boundary);
std::vector<ActionId> reduced_appearance(const Automaton& a, const Behaviour& b, std::size_t boundary);

/// Keeps the given states (ascending ids) and every motion between them that
/// `keep_motion` accepts; reflexive motions are always kept.
template <class Pred>
Automaton restrict(const Automaton& a, const std::vector<StateId>& states, Pred keep_motion,
                   std::optional<StateId> initial);

Automaton restrict_states(const Automaton& a, const std::vector<StateId>& states,
                          std::optional<StateId> initial);

/// States path-reachable from `from`, in ascending id order.
std::vector<StateId> reachable_states(const Automaton& a, StateId from);

/// Subautomaton reachable from `from`, which becomes the initial state.
Automaton reachable(const Automaton& a, StateId from);
/// Reachable from the initial state; throws InputError when there is none.
Automaton reachable(const Automaton& a);

bool is_linear(const Automaton& a);
std::vector<MotionId> linear_motions(const Automaton& a);
/// All states, linear motions only. Returns `a` itself when already linear.
Automaton linearize(const Automaton& a);

struct Refinement {
  MotionId motion = 0;
  std::vector<std::size_t> order;  // boundaries where the motion is nontrivial
  Behaviour path;
};

struct LinearizabilityResult {
  bool linearizable = true;
  std::vector<Refinement> refinements;  // nonlinear motions only
  std::optional<Refinement> failure;    // path empty
};

LinearizabilityResult check_linearizable(const Automaton& a);
inline bool is_linearizable(const Automaton& a) { return check_linearizable(a).linearizable; }

// ---------------------------------------------------------------------------

namespace detail {
Automaton make_restriction(const Automaton& a, const std::vector<StateId>& states,
                           const std::vector<char>& keep_motion, std::optional<StateId> initial);
}

template <class Pred>
Automaton restrict(const Automaton& a, const std::vector<StateId>& states, Pred keep_motion,
                   std::optional<StateId> initial) {
  std::vector<char> keep(a.num_motions(), 0);
  for (MotionId m = 0; m < a.num_motions(); ++m) keep[m] = a.is_reflexive(m) || keep_motion(m);
  return detail::make_restriction(a, states, keep, initial);
}

}  // namespace awb
