#include "awb/action_set.hpp"

#include <algorithm>
#include <set>

#include "awb/error.hpp"

namespace awb {

ActionSet::ActionSet(std::string name, const std::vector<std::string>& nontrivial) {
  std::vector<std::string> actions;
  actions.reserve(nontrivial.size() + 1);
  actions.emplace_back(kTauName);
  for (const auto& a : nontrivial) actions.push_back(a);
  *this = from_actions(std::move(name), actions, 0);
}

ActionSet ActionSet::from_actions(std::string name, const std::vector<std::string>& actions,
                                  std::size_t reflexive) {
  if (actions.empty()) throw InputError("action set '" + name + "' has no actions");
  if (reflexive >= actions.size())
    throw InputError("action set '" + name + "': reflexive index out of range");
  std::set<std::string_view> seen;
  for (const auto& a : actions) {
    if (a.empty()) throw InputError("action set '" + name + "' contains an empty action name");
    if (!seen.insert(a).second)
      throw InputError("action set '" + name + "' declares action '" + a + "' twice");
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i != reflexive && actions[i] == kTauName)
      throw InputError("action set '" + name + "': 'tau' is reserved for the trivial action");
  }
  if (actions.size() > 0xFFFF) throw InputError("action set '" + name + "' is too large");

  auto d = std::make_shared<Data>();
  d->name = std::move(name);
  d->actions.push_back(actions[reflexive]);
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (i != reflexive) d->actions.push_back(actions[i]);
  return ActionSet(std::move(d));
}

std::optional<ActionId> ActionSet::find(std::string_view action) const {
  const auto& acts = data_->actions;
  auto it = std::find(acts.begin(), acts.end(), action);
  if (it == acts.end()) return std::nullopt;
  return static_cast<ActionId>(it - acts.begin());
}

bool operator==(const ActionSet& a, const ActionSet& b) {
  if (a.data_ == b.data_) return true;
  return a.data_->name == b.data_->name && a.data_->actions == b.data_->actions;
}

std::string BoundarySignature::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (split && *split == i) out += i == 0 ? "; " : " ; ";
    else if (i > 0) out += ", ";
    out += boundaries[i].name();
  }
  if (split && *split == boundaries.size()) out += boundaries.empty() ? ";" : " ;";
  out += ")";
  return out;
}

}  // namespace awb
