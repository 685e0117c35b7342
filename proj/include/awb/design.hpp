#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "awb/automaton.hpp"

namespace awb {

/// An expression over automaton variables. Immutable; cheap to copy.
class Design {
 public:
  enum class Kind { kVar, kBind, kFeedback, kProduct, kIdentity, kDiagonal, kOpposite };

  struct Node {
    Kind kind = Kind::kVar;
    std::string var;        // kVar
    Automaton automaton;    // kVar: default assignment
    std::optional<ActionSet> type;  // constants
    std::vector<Design> children;
    std::size_t j = 0, k = 0;  // glued boundaries (kBind, kFeedback)
    BoundarySignature signature;
    std::string label;  // for diagnostics
  };

  Design() = default;

  static Design var(std::string name, Automaton default_assignment);
  /// Glues the last boundary of `left` to the first of `right`.
  static Design bind(Design left, Design right);
  static Design bind(Design left, Design right, std::size_t j, std::size_t k);
  static Design feedback(Design child, std::size_t j, std::size_t k);
  static Design product(Design left, Design right);
  static Design identity(const ActionSet& x);
  static Design diagonal(const ActionSet& x);
  static Design opposite(Design child);

  bool valid() const { return node_ != nullptr; }
  const Node& node() const { return *node_; }
  Kind kind() const { return node_->kind; }
  const BoundarySignature& signature() const { return node_->signature; }
  const std::vector<Design>& children() const { return node_->children; }

  /// Human-readable expression in model-file syntax.
  std::string to_string() const;

  /// Same tree shape, operations, glue indices and variable names.
  bool same_shape(const Design& other) const;

 private:
  explicit Design(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Port {
  std::size_t component = 0;
  std::size_t boundary = 0;
  auto operator<=>(const Port&) const = default;
};

struct Wire {
  Port a, b;  // a < b
  auto operator<=>(const Wire&) const = default;
};

struct Component {
  std::string name;  // variable name (suffixed #k for repeated occurrences) or constant label
  std::optional<std::string> var;  // empty for structural constants
  Automaton automaton;             // default assignment or the constant automaton
};

struct WiringDiagram {
  std::vector<Component> components;
  std::vector<Wire> wires;  // sorted
  std::vector<Port> open_ports;
  /// For each component and boundary, the port at the other end of its wire.
  std::vector<std::vector<std::optional<Port>>> peer;
};

WiringDiagram flatten(const Design& d);

using GlobalState = std::vector<StateId>;

/// A design plus an automaton per variable.
class System {
 public:
  System(std::string name, Design design, std::map<std::string, Automaton> overrides = {});

  const std::string& name() const { return name_; }
  const Design& design() const { return design_; }
  const WiringDiagram& diagram() const { return diagram_; }
  std::size_t size() const { return automata_.size(); }
  const Automaton& automaton(std::size_t c) const { return automata_[c]; }
  const std::vector<Automaton>& automata() const { return automata_; }
  const std::map<std::string, Automaton>& overrides() const { return overrides_; }
  /// Automaton assigned to a variable (override or default).
  Automaton assignment(const std::string& var) const;

  GlobalState initial() const;
  bool is_closed() const { return diagram_.open_ports.empty(); }
  bool all_linear() const;

  std::optional<std::size_t> find_component(std::string_view name) const;
  std::string render_state(const GlobalState& g) const;
  /// Per-component local motion names, as a tuple.
  std::string render_motion(std::span<const MotionId> m) const;

 private:
  std::string name_;
  Design design_;
  std::map<std::string, Automaton> overrides_;
  WiringDiagram diagram_;
  std::vector<Automaton> automata_;
};

/// Applies the algebra along the design tree. Leaves of the result are the
/// components, in component order.
Automaton evaluate(const System& sys);

enum class Mode { kAll, kAtomic };

const char* to_string(Mode m);
Mode parse_mode(std::string_view s);

/// Components allowed to move; others stay reflexive. Empty = all.
using ComponentMask = std::vector<char>;

/// Calls `visit(motion, target)` for every nontrivial successor. Returning
/// false from `visit` stops the enumeration. Returns false if stopped.
bool for_each_successor(const System& sys, const GlobalState& g, Mode mode, const ComponentMask& mask,
                        const std::function<bool(std::span<const MotionId>, const GlobalState&)>& visit);

struct Successor {
  std::vector<MotionId> motion;
  GlobalState target;
};

std::vector<Successor> successors(const System& sys, const GlobalState& g, Mode mode,
                                  const ComponentMask& mask = {});

bool has_successor(const System& sys, const GlobalState& g, Mode mode, const ComponentMask& mask = {});

/// Throws InputError when `mode` is atomic and the system does not qualify.
void check_mode(const System& sys, Mode mode);

/// Labels a global motion shows on the open ports, in open-port order.
std::vector<ActionId> open_labels(const System& sys, std::span<const MotionId> motion);

std::vector<StateId> project_local(const System& sys, const GlobalState& g,
                                   const std::vector<std::size_t>& subsystem);

}  // namespace awb
