#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "awb/core.hpp"
#include "awb/design.hpp"

namespace awb {

/// A map between automata, defined on the states and motions reachable from
/// the source's initial state (on everything when there is none). Entries
/// outside that domain are kNone.
struct Comparison {
  Automaton source;
  Automaton target;
  std::vector<StateId> state_map;
  std::vector<MotionId> motion_map;
};

/// States and motions on which a comparison with this source is defined.
std::vector<char> comparison_state_domain(const Automaton& source);

std::vector<Violation> verify_comparison(const Comparison& f);

/// Completes a state map to a comparison: each motion goes to the unique
/// target motion with mapped endpoints and equal labels (reflexive to
/// reflexive). Throws InputError when a motion has no or several candidates.
Comparison infer_comparison(const Automaton& source, const Automaton& target, std::vector<StateId> state_map,
                            const std::map<MotionId, MotionId>& fixed = {});

/// For a state v and a target motion e leaving f(v): a behaviour from v
/// whose steps map to the reflexive motion at f(v), except the last, which
/// maps to e.
struct Lifting {
  StateId state = 0;
  MotionId target_motion = 0;
  Behaviour path;
};

struct SimulationCheck;
SimulationCheck check_simulation(const Comparison& f);

class Simulation {
 public:
  const Comparison& comparison() const { return f_; }
  const Automaton& source() const { return f_.source; }
  const Automaton& target() const { return f_.target; }
  StateId state(StateId v) const { return f_.state_map[v]; }
  MotionId motion(MotionId m) const { return f_.motion_map[m]; }
  const std::vector<Lifting>& certificate() const { return certificate_; }

 private:
  friend SimulationCheck check_simulation(const Comparison& f);
  Simulation(Comparison f, std::vector<Lifting> cert) : f_(std::move(f)), certificate_(std::move(cert)) {}
  Comparison f_;
  std::vector<Lifting> certificate_;
};

struct SimulationCheck {
  std::vector<Violation> violations;  // comparison invariants
  std::optional<Simulation> simulation;
  /// A source state and a target motion that cannot be lifted.
  std::optional<std::pair<StateId, MotionId>> counterexample;
  bool ok() const { return simulation.has_value(); }
  std::string describe(const Comparison& f) const;
};

/// Throws InputError describing the failure when `f` is not a simulation.
Simulation verify_simulation(const Comparison& f, const std::string& what = "comparison");

Simulation identity_simulation(const Automaton& a);
Simulation compose(const Simulation& f, const Simulation& g);
Simulation bind_sim(const Simulation& f, const Simulation& g, std::size_t j, std::size_t k);
Simulation fb_sim(const Simulation& f, std::size_t j, std::size_t k);
Simulation product_sim(const Simulation& f, const Simulation& g);
Simulation opposite_sim(const Simulation& f);

/// Builds the simulation between the evaluations of two systems sharing a
/// design shape, from simulations for some variables; the remaining
/// components must carry the same automaton on both sides.
Simulation lift_simulation(const System& source, const System& target,
                           const std::map<std::string, Simulation>& per_variable);

/// Same object, or equal content.
bool same_automaton(const Automaton& a, const Automaton& b);

struct PreimageResult {
  std::vector<StateId> preimage;   // source states mapped onto a target deadlock
  std::vector<StateId> deadlocks;  // those of them that are deadlocks
};

PreimageResult preimage_deadlock_check(const Simulation& f, const std::vector<StateId>& target_deadlocks);

struct LanguageCheck {
  bool equivalent = true;
  /// Shortest word (one label vector per letter) in exactly one language.
  std::vector<std::vector<ActionId>> counterexample;
  bool in_left = false;
};

/// Compares the prefix languages of reduced appearances on the selected
/// boundaries (all boundaries when `boundaries` is empty), from the initial
/// states, up to `max_len` letters or exactly when absent.
LanguageCheck reduced_language_equiv(const Automaton& s, const Automaton& t,
                                     const std::vector<std::size_t>& boundaries = {},
                                     std::optional<std::size_t> max_len = std::nullopt);

}  // namespace awb
