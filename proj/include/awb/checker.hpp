#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "awb/design.hpp"

namespace awb {

struct DeadlockReport {
  std::string algorithm;  // bfs | misa | product-analysis
  std::string system;
  std::string mode;
  std::size_t explored = 0;
  std::optional<std::size_t> reachable;
  std::vector<std::string> component_names;
  std::vector<GlobalState> deadlocks;  // sorted by rendered names
  std::vector<std::vector<std::string>> deadlock_names;
  /// Per deadlock, the global motions leading to it from the initial state.
  std::optional<std::vector<std::vector<std::vector<MotionId>>>> witnesses;
  std::optional<std::vector<std::vector<std::string>>> witness_names;
  double elapsed_ms = 0;
  bool complete = true;
};

/// State budget exhausted; carries what was found so far.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, DeadlockReport partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const DeadlockReport& partial() const { return partial_; }

 private:
  DeadlockReport partial_;
};

enum class Order { kFifo, kLifo };

struct CheckOptions {
  Mode mode = Mode::kAll;
  std::size_t max_states = 0;  // 0 = unlimited
  bool witnesses = false;
  unsigned threads = 1;
  Order order = Order::kFifo;
};

DeadlockReport bfs_deadlocks(const System& sys, const CheckOptions& opt = {});
DeadlockReport misa_deadlocks(const System& sys, const CheckOptions& opt = {});

/// Per component, the boundaries watched at `g`, ascending.
using WatchSet = std::vector<std::vector<std::size_t>>;
WatchSet watch_sets(const System& sys, const GlobalState& g);

/// Edge c -> d when c watches a boundary wired to d (d != c).
std::vector<std::vector<std::size_t>> watching_graph(const System& sys, const GlobalState& g);

/// Forward closure of each component in the watching graph; sorted, one per component.
std::vector<std::vector<std::size_t>> introspective_closures(const System& sys, const GlobalState& g);

bool is_introspective(const System& sys, const GlobalState& g, const std::vector<std::size_t>& subset);

/// No nontrivial motion moves only members of `subset`.
bool subsystem_deadlocked(const System& sys, const GlobalState& g, const std::vector<std::size_t>& subset,
                          Mode mode);

/// Smallest closure not deadlocked at `g`; ties by least sorted index set.
/// Throws InputError when `g` is a global deadlock.
std::vector<std::size_t> minimal_introspective_subsystem(const System& sys, const GlobalState& g,
                                                         Mode mode = Mode::kAll);

enum class Strength { kWeak, kStrong };

struct ProductAnalysis {
  DeadlockReport report;
  /// Explored pairs (s-state, t-state), in exploration order.
  std::vector<std::pair<StateId, StateId>> explored;
};

ProductAnalysis product_deadlock_analysis(const Automaton& s, const Automaton& t, Strength strength);

/// Deadlock: the only motion leaving the state is its reflexive motion.
bool is_deadlock(const Automaton& a, StateId v);

}  // namespace awb
