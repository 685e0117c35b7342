#pragma once

#include <optional>
#include <vector>

#include "awb/automaton.hpp"

namespace awb {

// Signatures of composites. Boundary order: after bind, the remaining
// boundaries of the left operand then those of the right; feedback and
// product keep relative order. A split survives only when every boundary
// that came from a left side still precedes every one from a right side.
BoundarySignature bind_signature(const BoundarySignature& s, const BoundarySignature& t, std::size_t j,
                                 std::size_t k);
BoundarySignature feedback_signature(const BoundarySignature& s, std::size_t j, std::size_t k);
BoundarySignature product_signature(const BoundarySignature& s, const BoundarySignature& t);
/// Boundary i of the result is boundary perm[i] of `s`.
BoundarySignature permute_signature(const BoundarySignature& s, const std::vector<std::size_t>& perm,
                                    std::optional<std::size_t> split);
BoundarySignature opposite_signature(const BoundarySignature& s);
/// Permutation used by `opposite`: right side first, then left side.
std::vector<std::size_t> opposite_permutation(const BoundarySignature& s);

Automaton bind(const Automaton& s, const Automaton& t, std::size_t j, std::size_t k);
/// Glues the last boundary of `s` to the first boundary of `t`.
Automaton bind(const Automaton& s, const Automaton& t);
Automaton feedback(const Automaton& s, std::size_t j, std::size_t k);
Automaton product(const Automaton& s, const Automaton& t);
Automaton permute(const Automaton& s, const std::vector<std::size_t>& perm,
                  std::optional<std::size_t> split = std::nullopt);
Automaton opposite(const Automaton& s);

/// Binds along several boundary pairs at once: the first pair by `bind`,
/// the rest by feedback on the result.
Automaton bind_multi(const Automaton& s, const Automaton& t,
                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// One state, one motion per action labelled (x|x).
Automaton identity_automaton(const ActionSet& x);
/// One state, one motion per action labelled (x|x,x).
Automaton diagonal_automaton(const ActionSet& x);
/// One state, reflexive motion only, no boundaries.
Automaton unit_automaton();

struct Isomorphism {
  std::vector<StateId> states;    // s-state -> t-state
  std::vector<MotionId> motions;  // s-motion -> t-motion
};

/// Throws InputError when the boundary types differ.
std::optional<Isomorphism> isomorphic(const Automaton& s, const Automaton& t);

/// Checks that `iso` is an isomorphism from s to t.
bool check_isomorphism(const Automaton& s, const Automaton& t, const Isomorphism& iso);

}  // namespace awb
