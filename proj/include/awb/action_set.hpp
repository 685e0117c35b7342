#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace awb {

using ActionId = std::uint16_t;

/// The trivial action always sits at index 0 of every action set.
inline constexpr ActionId kTau = 0;

/// Spelling of the trivial action in model files and reports.
inline constexpr std::string_view kTauName = "tau";

/// A finite alphabet with a distinguished trivial action; the type of a
/// boundary. Cheap to copy (shared immutable storage).
class ActionSet {
 public:
  /// Builds `{tau} ∪ nontrivial`. Throws InputError on duplicates or on a
  /// nontrivial action spelled `tau`.
  ActionSet(std::string name, const std::vector<std::string>& nontrivial);

  /// Builds from an explicit action list with the trivial action at
  /// `reflexive`. The stored order moves that action to index 0.
  static ActionSet from_actions(std::string name, const std::vector<std::string>& actions,
                                std::size_t reflexive);

  const std::string& name() const { return data_->name; }
  std::size_t size() const { return data_->actions.size(); }
  ActionId reflexive() const { return kTau; }
  const std::string& action_name(ActionId a) const { return data_->actions.at(a); }
  const std::vector<std::string>& actions() const { return data_->actions; }
  std::optional<ActionId> find(std::string_view action) const;

  friend bool operator==(const ActionSet& a, const ActionSet& b);

 private:
  struct Data {
    std::string name;
    std::vector<std::string> actions;
  };
  explicit ActionSet(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

/// Ordered boundaries of an automaton. `split`, when present, says the first
/// `split` boundaries form the left side and the rest the right side.
struct BoundarySignature {
  std::vector<ActionSet> boundaries;
  std::optional<std::size_t> split;

  std::size_t size() const { return boundaries.size(); }
  const ActionSet& operator[](std::size_t i) const { return boundaries[i]; }

  /// "(L ; L)" style rendering used in diagnostics and model files.
  std::string to_string() const;

  friend bool operator==(const BoundarySignature&, const BoundarySignature&) = default;
};

}  // namespace awb
