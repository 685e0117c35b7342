#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "awb/action_set.hpp"

namespace awb {

using StateId = std::uint32_t;
using MotionId = std::uint32_t;

inline constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

namespace detail {
struct AutomatonData;
}

/// Half-open range of motion ids; motions of every automaton are stored
/// grouped by source state, so the motions leaving a state form a range.
struct MotionRange {
  struct iterator {
    MotionId m;
    MotionId operator*() const { return m; }
    iterator& operator++() {
      ++m;
      return *this;
    }
    bool operator==(const iterator&) const = default;
  };
  MotionId first = 0;
  MotionId last = 0;
  iterator begin() const { return {first}; }
  iterator end() const { return {last}; }
  std::size_t size() const { return last - first; }
  bool empty() const { return first == last; }
};

/// An automaton with boundary: a finite reflexive graph whose motions carry
/// one action per boundary. Immutable; copies share storage.
///
/// Automata built by the algebra remember how they were built (their
/// provenance). A composite state can be decomposed into the tuple of
/// states of the primitive automata it was built from ("leaves"), in
/// left-to-right order, and looked up again from such a tuple.
class Automaton {
 public:
  Automaton() = default;
  explicit Automaton(std::shared_ptr<const detail::AutomatonData> data) : data_(std::move(data)) {}

  bool valid() const { return data_ != nullptr; }

  const std::string& name() const;
  const BoundarySignature& signature() const;
  std::size_t arity() const;

  StateId num_states() const;
  MotionId num_motions() const;

  StateId source(MotionId m) const;
  StateId target(MotionId m) const;
  ActionId label(MotionId m, std::size_t boundary) const;
  std::span<const ActionId> labels(MotionId m) const;

  MotionId reflexive_of(StateId v) const;
  bool is_reflexive(MotionId m) const { return reflexive_of(source(m)) == m; }
  /// Trivial on every boundary (reflexive motions included).
  bool is_internal(MotionId m) const;
  /// Nontrivial on at most one boundary.
  bool is_linear(MotionId m) const;

  MotionRange out(StateId v) const;
  std::optional<StateId> initial() const;

  std::string state_name(StateId v) const;
  std::string motion_name(MotionId m) const;
  std::optional<StateId> find_state(std::string_view name) const;
  std::optional<MotionId> find_motion(std::string_view name) const;

  // Provenance.
  std::size_t leaf_count() const;
  std::vector<Automaton> leaves() const;
  std::vector<StateId> leaf_states(StateId v) const;
  std::vector<MotionId> leaf_motions(MotionId m) const;
  std::optional<StateId> state_from_leaves(std::span<const StateId> tuple) const;
  std::optional<MotionId> motion_from_leaves(std::span<const MotionId> tuple) const;

  /// Same automaton with a different (or no) initial state.
  Automaton with_initial(std::optional<StateId> v) const;
  /// Same automaton under a new display name.
  Automaton renamed(std::string name) const;

  bool same_object(const Automaton& other) const { return data_ == other.data_; }
  const detail::AutomatonData& data() const { return *data_; }

 private:
  void append_leaf_states(StateId v, std::vector<StateId>& out) const;
  void append_leaf_motions(MotionId m, std::vector<MotionId>& out) const;
  std::optional<StateId> lookup_leaves(std::span<const StateId> tuple) const;
  std::optional<MotionId> lookup_leaf_motions(std::span<const MotionId> tuple) const;

  std::shared_ptr<const detail::AutomatonData> data_;
};

namespace detail {

enum class Origin { kPrimitive, kBind, kProduct, kFeedback, kRestrict, kPermute };

struct AutomatonData {
  std::string name;
  BoundarySignature signature;
  StateId num_states = 0;

  std::vector<StateId> source;
  std::vector<StateId> target;
  std::vector<ActionId> labels;  // motion-major, arity() entries per motion
  std::vector<MotionId> out_begin;  // num_states + 1 entries
  std::vector<MotionId> reflexive_of;
  std::optional<StateId> initial;

  // Primitive automata only.
  std::vector<std::string> state_names;
  std::vector<std::string> motion_names;
  std::unordered_map<std::string, StateId> state_index;
  std::unordered_map<std::string, MotionId> motion_index;

  Origin origin = Origin::kPrimitive;
  std::vector<Automaton> operands;
  std::size_t leaf_count = 1;
  // kBind / kFeedback: glued boundary indices (of the left / only operand and right operand).
  std::size_t glue_left = 0;
  std::size_t glue_right = 0;
  // kPermute: boundary i of this automaton is boundary permutation[i] of the operand.
  std::vector<std::size_t> permutation;
  // kBind / kProduct: operand motions of each motion; kFeedback: tag_left only.
  std::vector<MotionId> tag_left;
  std::vector<MotionId> tag_right;
  // kRestrict: maps to and from the operand.
  std::vector<StateId> restrict_states;
  std::vector<StateId> restrict_state_inverse;
  std::vector<MotionId> restrict_motions;
  std::vector<MotionId> restrict_motion_inverse;

  std::size_t arity() const { return signature.size(); }
  MotionId num_motions() const { return static_cast<MotionId>(source.size()); }

  /// Fills out_begin from `source` (which must be sorted) and sets
  /// reflexive_of from motions flagged by the caller.
  void index_by_source();
};

}  // namespace detail

/// A violated automaton invariant. Violations are data, not failures.
struct Violation {
  std::string message;
  std::optional<MotionId> motion;
  std::optional<StateId> state;
};

/// Plain, unchecked automaton description. Useful for building automata
/// from external input and for exercising `validate` on broken data.
struct RawMotion {
  StateId source = 0;
  StateId target = 0;
  std::vector<ActionId> labels;
  bool reflexive = false;
  std::string name;
};

struct RawAutomaton {
  std::string name;
  BoundarySignature signature;
  std::vector<std::string> states;
  std::vector<RawMotion> motions;
  /// state -> index into `motions`
  std::vector<MotionId> reflexive_of;
  std::optional<StateId> initial;
};

std::vector<Violation> validate(const RawAutomaton& a);
std::vector<Violation> validate(const Automaton& a);

/// Converts a raw description; throws InputError listing every violation.
Automaton build_automaton(const RawAutomaton& raw);

/// Name-based construction of primitive automata. Reflexive motions are
/// generated automatically, one per state.
class AutomatonBuilder {
 public:
  AutomatonBuilder(std::string name, BoundarySignature signature);

  AutomatonBuilder& state(std::string name);
  AutomatonBuilder& states(const std::vector<std::string>& names);
  /// Labels are action names, one per boundary; `tau` is the trivial action.
  AutomatonBuilder& motion(std::string_view source, std::string_view target,
                           const std::vector<std::string>& labels, std::string name = {});
  AutomatonBuilder& initial(std::string_view state);

  RawAutomaton raw() const;
  Automaton build() const { return build_automaton(raw()); }

 private:
  StateId state_id(std::string_view name) const;

  RawAutomaton raw_;
  std::unordered_map<std::string, StateId> index_;
};

/// Returns a composite display name like "(a,b,c)" or the single element.
std::string tuple_name(const std::vector<std::string>& parts);
/// Splits "(a,b,c)" into its elements; a name without parentheses is a one-tuple.
std::vector<std::string> split_tuple_name(std::string_view name);

}  // namespace awb
