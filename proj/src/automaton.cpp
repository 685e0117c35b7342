#include "awb/automaton.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "awb/error.hpp"

namespace awb {

using detail::AutomatonData;
using detail::Origin;

// ---------------------------------------------------------------------------
// AutomatonData

void AutomatonData::index_by_source() {
  out_begin.assign(num_states + 1, 0);
  for (StateId s : source) ++out_begin[s + 1];
  std::partial_sum(out_begin.begin(), out_begin.end(), out_begin.begin());
}

// ---------------------------------------------------------------------------
// Accessors

const std::string& Automaton::name() const { return data_->name; }
const BoundarySignature& Automaton::signature() const { return data_->signature; }
std::size_t Automaton::arity() const { return data_->arity(); }
StateId Automaton::num_states() const { return data_->num_states; }
MotionId Automaton::num_motions() const { return data_->num_motions(); }
StateId Automaton::source(MotionId m) const { return data_->source[m]; }
StateId Automaton::target(MotionId m) const { return data_->target[m]; }

ActionId Automaton::label(MotionId m, std::size_t boundary) const {
  return data_->labels[static_cast<std::size_t>(m) * data_->arity() + boundary];
}

std::span<const ActionId> Automaton::labels(MotionId m) const {
  const std::size_t n = data_->arity();
  return {data_->labels.data() + static_cast<std::size_t>(m) * n, n};
}

MotionId Automaton::reflexive_of(StateId v) const { return data_->reflexive_of[v]; }

bool Automaton::is_internal(MotionId m) const {
  for (ActionId a : labels(m))
    if (a != kTau) return false;
  return true;
}

bool Automaton::is_linear(MotionId m) const {
  int nontrivial = 0;
  for (ActionId a : labels(m))
    if (a != kTau) ++nontrivial;
  return nontrivial <= 1;
}

MotionRange Automaton::out(StateId v) const {
  return {data_->out_begin[v], data_->out_begin[v + 1]};
}

std::optional<StateId> Automaton::initial() const { return data_->initial; }

// ---------------------------------------------------------------------------
// Provenance

std::size_t Automaton::leaf_count() const { return data_->leaf_count; }

std::vector<Automaton> Automaton::leaves() const {
  switch (data_->origin) {
    case Origin::kPrimitive:
      return {*this};
    case Origin::kBind:
    case Origin::kProduct: {
      auto l = data_->operands[0].leaves();
      auto r = data_->operands[1].leaves();
      l.insert(l.end(), r.begin(), r.end());
      return l;
    }
    case Origin::kFeedback:
    case Origin::kRestrict:
    case Origin::kPermute:
      return data_->operands[0].leaves();
  }
  return {};
}

void Automaton::append_leaf_states(StateId v, std::vector<StateId>& out) const {
  const auto& d = *data_;
  switch (d.origin) {
    case Origin::kPrimitive:
      out.push_back(v);
      return;
    case Origin::kBind:
    case Origin::kProduct: {
      const StateId n = d.operands[1].num_states();
      d.operands[0].append_leaf_states(v / n, out);
      d.operands[1].append_leaf_states(v % n, out);
      return;
    }
    case Origin::kFeedback:
    case Origin::kPermute:
      d.operands[0].append_leaf_states(v, out);
      return;
    case Origin::kRestrict:
      d.operands[0].append_leaf_states(d.restrict_states[v], out);
      return;
  }
}

std::vector<StateId> Automaton::leaf_states(StateId v) const {
  std::vector<StateId> out;
  out.reserve(leaf_count());
  append_leaf_states(v, out);
  return out;
}

void Automaton::append_leaf_motions(MotionId m, std::vector<MotionId>& out) const {
  const auto& d = *data_;
  switch (d.origin) {
    case Origin::kPrimitive:
      out.push_back(m);
      return;
    case Origin::kBind:
    case Origin::kProduct:
      d.operands[0].append_leaf_motions(d.tag_left[m], out);
      d.operands[1].append_leaf_motions(d.tag_right[m], out);
      return;
    case Origin::kFeedback:
      d.operands[0].append_leaf_motions(d.tag_left[m], out);
      return;
    case Origin::kPermute:
      d.operands[0].append_leaf_motions(m, out);
      return;
    case Origin::kRestrict:
      d.operands[0].append_leaf_motions(d.restrict_motions[m], out);
      return;
  }
}

std::vector<MotionId> Automaton::leaf_motions(MotionId m) const {
  std::vector<MotionId> out;
  out.reserve(leaf_count());
  append_leaf_motions(m, out);
  return out;
}

std::optional<StateId> Automaton::lookup_leaves(std::span<const StateId> tuple) const {
  const auto& d = *data_;
  switch (d.origin) {
    case Origin::kPrimitive:
      if (tuple[0] >= d.num_states) return std::nullopt;
      return tuple[0];
    case Origin::kBind:
    case Origin::kProduct: {
      const auto& l = d.operands[0];
      const auto& r = d.operands[1];
      auto a = l.lookup_leaves(tuple.first(l.leaf_count()));
      auto b = r.lookup_leaves(tuple.subspan(l.leaf_count()));
      if (!a || !b) return std::nullopt;
      return *a * r.num_states() + *b;
    }
    case Origin::kFeedback:
    case Origin::kPermute:
      return d.operands[0].lookup_leaves(tuple);
    case Origin::kRestrict: {
      auto p = d.operands[0].lookup_leaves(tuple);
      if (!p || d.restrict_state_inverse[*p] == kNone) return std::nullopt;
      return d.restrict_state_inverse[*p];
    }
  }
  return std::nullopt;
}

std::optional<StateId> Automaton::state_from_leaves(std::span<const StateId> tuple) const {
  if (tuple.size() != leaf_count()) return std::nullopt;
  return lookup_leaves(tuple);
}

std::optional<MotionId> Automaton::lookup_leaf_motions(std::span<const MotionId> tuple) const {
  const auto& d = *data_;
  switch (d.origin) {
    case Origin::kPrimitive:
      if (tuple[0] >= d.num_motions()) return std::nullopt;
      return tuple[0];
    case Origin::kBind:
    case Origin::kProduct: {
      const auto& l = d.operands[0];
      const auto& r = d.operands[1];
      auto a = l.lookup_leaf_motions(tuple.first(l.leaf_count()));
      auto b = r.lookup_leaf_motions(tuple.subspan(l.leaf_count()));
      if (!a || !b) return std::nullopt;
      const StateId src = l.source(*a) * r.num_states() + r.source(*b);
      for (MotionId m : out(src))
        if (d.tag_left[m] == *a && d.tag_right[m] == *b) return m;
      return std::nullopt;
    }
    case Origin::kFeedback: {
      auto c = d.operands[0].lookup_leaf_motions(tuple);
      if (!c) return std::nullopt;
      auto it = std::lower_bound(d.tag_left.begin(), d.tag_left.end(), *c);
      if (it == d.tag_left.end() || *it != *c) return std::nullopt;
      return static_cast<MotionId>(it - d.tag_left.begin());
    }
    case Origin::kPermute:
      return d.operands[0].lookup_leaf_motions(tuple);
    case Origin::kRestrict: {
      auto p = d.operands[0].lookup_leaf_motions(tuple);
      if (!p || d.restrict_motion_inverse[*p] == kNone) return std::nullopt;
      return d.restrict_motion_inverse[*p];
    }
  }
  return std::nullopt;
}

std::optional<MotionId> Automaton::motion_from_leaves(std::span<const MotionId> tuple) const {
  if (tuple.size() != leaf_count()) return std::nullopt;
  return lookup_leaf_motions(tuple);
}

// ---------------------------------------------------------------------------
// Names

std::string tuple_name(const std::vector<std::string>& parts) {
  if (parts.size() == 1) return parts[0];
  std::string out = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  out += ')';
  return out;
}

std::vector<std::string> split_tuple_name(std::string_view name) {
  if (name.size() < 2 || name.front() != '(' || name.back() != ')') return {std::string(name)};
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char c : name.substr(1, name.size() - 2)) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(std::move(cur));
  return parts;
}

std::string Automaton::state_name(StateId v) const {
  if (data_->origin == Origin::kPrimitive) return data_->state_names[v];
  auto lv = leaves();
  auto ls = leaf_states(v);
  std::vector<std::string> parts;
  parts.reserve(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) parts.push_back(lv[i].state_name(ls[i]));
  return tuple_name(parts);
}

std::string Automaton::motion_name(MotionId m) const {
  if (data_->origin == Origin::kPrimitive) return data_->motion_names[m];
  auto lv = leaves();
  auto lm = leaf_motions(m);
  std::vector<std::string> parts;
  parts.reserve(lm.size());
  for (std::size_t i = 0; i < lm.size(); ++i) parts.push_back(lv[i].motion_name(lm[i]));
  return tuple_name(parts);
}

std::optional<StateId> Automaton::find_state(std::string_view name) const {
  if (data_->origin == Origin::kPrimitive) {
    auto it = data_->state_index.find(std::string(name));
    if (it == data_->state_index.end()) return std::nullopt;
    return it->second;
  }
  auto lv = leaves();
  auto parts = lv.size() == 1 ? std::vector<std::string>{std::string(name)} : split_tuple_name(name);
  if (parts.size() != lv.size()) return std::nullopt;
  std::vector<StateId> tuple;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto s = lv[i].find_state(parts[i]);
    if (!s) return std::nullopt;
    tuple.push_back(*s);
  }
  return state_from_leaves(tuple);
}

std::optional<MotionId> Automaton::find_motion(std::string_view name) const {
  if (data_->origin == Origin::kPrimitive) {
    auto it = data_->motion_index.find(std::string(name));
    if (it == data_->motion_index.end()) return std::nullopt;
    return it->second;
  }
  auto lv = leaves();
  auto parts = lv.size() == 1 ? std::vector<std::string>{std::string(name)} : split_tuple_name(name);
  if (parts.size() != lv.size()) return std::nullopt;
  std::vector<MotionId> tuple;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto m = lv[i].find_motion(parts[i]);
    if (!m) return std::nullopt;
    tuple.push_back(*m);
  }
  return motion_from_leaves(tuple);
}

Automaton Automaton::with_initial(std::optional<StateId> v) const {
  if (v && *v >= num_states()) throw InputError("with_initial: state out of range");
  auto d = std::make_shared<AutomatonData>(*data_);
  d->initial = v;
  return Automaton(std::move(d));
}

Automaton Automaton::renamed(std::string name) const {
  auto d = std::make_shared<AutomatonData>(*data_);
  d->name = std::move(name);
  return Automaton(std::move(d));
}

// ---------------------------------------------------------------------------
// Validation

namespace {

std::string motion_ref(const RawAutomaton& a, MotionId m) {
  const auto& mo = a.motions[m];
  std::string label = mo.name.empty() ? "#" + std::to_string(m) : "'" + mo.name + "'";
  auto state = [&](StateId s) { return s < a.states.size() ? a.states[s] : "?" + std::to_string(s); };
  return "motion " + label + " (" + state(mo.source) + " -> " + state(mo.target) + ")";
}

}  // namespace

std::vector<Violation> validate(const RawAutomaton& a) {
  std::vector<Violation> out;
  const auto n = static_cast<StateId>(a.states.size());
  const std::size_t arity = a.signature.size();

  if (a.signature.split && *a.signature.split > arity)
    out.push_back({"signature split exceeds the number of boundaries", {}, {}});

  std::set<std::string_view> names;
  for (StateId s = 0; s < n; ++s) {
    if (a.states[s].empty()) out.push_back({"state #" + std::to_string(s) + " has an empty name", {}, s});
    else if (!names.insert(a.states[s]).second)
      out.push_back({"state '" + a.states[s] + "' declared twice", {}, s});
  }

  std::set<std::string_view> motion_names;
  for (MotionId m = 0; m < a.motions.size(); ++m) {
    const auto& mo = a.motions[m];
    if (mo.source >= n || mo.target >= n) {
      out.push_back({motion_ref(a, m) + " has an endpoint outside the state set", m, {}});
      continue;
    }
    if (!mo.name.empty() && !motion_names.insert(mo.name).second)
      out.push_back({motion_ref(a, m) + ": duplicate motion name", m, {}});
    if (mo.labels.size() != arity) {
      out.push_back({motion_ref(a, m) + " carries " + std::to_string(mo.labels.size()) +
                         " labels but the automaton has " + std::to_string(arity) + " boundaries",
                     m, {}});
    } else {
      for (std::size_t i = 0; i < arity; ++i) {
        if (mo.labels[i] >= a.signature[i].size())
          out.push_back({motion_ref(a, m) + ": label on boundary " + std::to_string(i) +
                             " is not an action of " + a.signature[i].name(),
                         m, {}});
      }
    }
    if (mo.reflexive) {
      if (mo.source != mo.target) out.push_back({motion_ref(a, m) + " is reflexive but not a self-loop", m, {}});
      for (ActionId l : mo.labels) {
        if (l != kTau) {
          out.push_back({motion_ref(a, m) + " is reflexive but carries a nontrivial label", m, {}});
          break;
        }
      }
    }
  }

  if (a.reflexive_of.size() != n) {
    out.push_back({"reflexive motion table has " + std::to_string(a.reflexive_of.size()) +
                       " entries for " + std::to_string(n) + " states",
                   {}, {}});
  } else {
    std::vector<int> claimed(a.motions.size(), 0);
    for (StateId s = 0; s < n; ++s) {
      const MotionId r = a.reflexive_of[s];
      if (r >= a.motions.size()) {
        out.push_back({"state '" + a.states[s] + "' has no reflexive motion", {}, s});
        continue;
      }
      ++claimed[r];
      const auto& mo = a.motions[r];
      if (!mo.reflexive || mo.source != s || mo.target != s)
        out.push_back({"state '" + a.states[s] + "' designates " + motion_ref(a, r) +
                           ", which is not a reflexive self-loop at it",
                       r, s});
    }
    for (MotionId m = 0; m < a.motions.size(); ++m) {
      if (a.motions[m].reflexive && claimed[m] == 0)
        out.push_back({motion_ref(a, m) + " is flagged reflexive but no state designates it", m, {}});
      if (claimed[m] > 1) out.push_back({motion_ref(a, m) + " is designated by several states", m, {}});
    }
  }

  if (a.initial && *a.initial >= n) out.push_back({"initial state is not a state of the automaton", {}, {}});
  return out;
}

std::vector<Violation> validate(const Automaton& a) {
  std::vector<Violation> out;
  const auto& d = a.data();
  const std::size_t arity = d.arity();
  if (d.signature.split && *d.signature.split > arity)
    out.push_back({"signature split exceeds the number of boundaries", {}, {}});
  if (d.labels.size() != static_cast<std::size_t>(d.num_motions()) * arity)
    out.push_back({"label storage does not match the boundary count", {}, {}});
  if (d.reflexive_of.size() != d.num_states) {
    out.push_back({"reflexive motion table size mismatch", {}, {}});
    return out;
  }
  for (MotionId m = 0; m < d.num_motions(); ++m) {
    if (d.source[m] >= d.num_states || d.target[m] >= d.num_states) {
      out.push_back({"motion " + std::to_string(m) + " has an endpoint outside the state set", m, {}});
      continue;
    }
    for (std::size_t i = 0; i < arity; ++i)
      if (a.label(m, i) >= d.signature[i].size())
        out.push_back({"motion " + a.motion_name(m) + " carries an unknown action", m, {}});
  }
  for (StateId s = 0; s < d.num_states; ++s) {
    const MotionId r = d.reflexive_of[s];
    if (r >= d.num_motions() || d.source[r] != s || d.target[r] != s) {
      out.push_back({"state " + a.state_name(s) + " has no reflexive self-loop", {}, s});
      continue;
    }
    if (!a.is_internal(r))
      out.push_back({"reflexive motion " + a.motion_name(r) + " carries a nontrivial label", r, s});
  }
  if (d.initial && *d.initial >= d.num_states) out.push_back({"initial state out of range", {}, {}});
  return out;
}

Automaton build_automaton(const RawAutomaton& raw) {
  auto violations = validate(raw);
  if (!violations.empty()) {
    std::string msg = "automaton '" + raw.name + "' is invalid:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw InputError(msg);
  }

  auto d = std::make_shared<AutomatonData>();
  d->name = raw.name;
  d->signature = raw.signature;
  d->num_states = static_cast<StateId>(raw.states.size());
  d->state_names = raw.states;
  d->initial = raw.initial;
  for (StateId s = 0; s < d->num_states; ++s) d->state_index.emplace(raw.states[s], s);

  std::vector<MotionId> order(raw.motions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](MotionId x, MotionId y) {
    return raw.motions[x].source < raw.motions[y].source;
  });

  // Default names: m<k> by position among nonreflexive motions once sorted
  // by source; reflexive motions are @<state>.
  std::vector<std::string> names(raw.motions.size());
  std::set<std::string> taken;
  for (const auto& mo : raw.motions)
    if (!mo.name.empty()) taken.insert(mo.name);
  std::size_t k = 0;
  for (MotionId m : order) {
    const auto& mo = raw.motions[m];
    if (mo.reflexive) {
      names[m] = mo.name.empty() ? "@" + raw.states[mo.source] : mo.name;
    } else if (!mo.name.empty()) {
      names[m] = mo.name;
      ++k;
    } else {
      std::string candidate = "m" + std::to_string(k++);
      while (taken.count(candidate)) candidate += "_";
      names[m] = candidate;
    }
    if (mo.name.empty() && !taken.insert(names[m]).second)
      throw InputError("automaton '" + raw.name + "': generated motion name '" + names[m] +
                       "' clashes with a declared one");
  }

  std::vector<MotionId> new_id(raw.motions.size());
  const std::size_t arity = raw.signature.size();
  for (MotionId i = 0; i < order.size(); ++i) {
    const auto& mo = raw.motions[order[i]];
    new_id[order[i]] = i;
    d->source.push_back(mo.source);
    d->target.push_back(mo.target);
    d->labels.insert(d->labels.end(), mo.labels.begin(), mo.labels.begin() + arity);
    d->motion_names.push_back(names[order[i]]);
    d->motion_index.emplace(names[order[i]], i);
  }
  d->reflexive_of.resize(d->num_states);
  for (StateId s = 0; s < d->num_states; ++s) d->reflexive_of[s] = new_id[raw.reflexive_of[s]];
  d->index_by_source();
  return Automaton(std::move(d));
}

// ---------------------------------------------------------------------------
// Builder

AutomatonBuilder::AutomatonBuilder(std::string name, BoundarySignature signature) {
  raw_.name = std::move(name);
  raw_.signature = std::move(signature);
}

AutomatonBuilder& AutomatonBuilder::state(std::string name) {
  if (index_.count(name)) throw InputError("automaton '" + raw_.name + "': state '" + name + "' declared twice");
  index_.emplace(name, static_cast<StateId>(raw_.states.size()));
  raw_.states.push_back(std::move(name));
  return *this;
}

AutomatonBuilder& AutomatonBuilder::states(const std::vector<std::string>& names) {
  for (const auto& n : names) state(n);
  return *this;
}

StateId AutomatonBuilder::state_id(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    throw InputError("automaton '" + raw_.name + "': unknown state '" + std::string(name) + "'");
  return it->second;
}

AutomatonBuilder& AutomatonBuilder::motion(std::string_view source, std::string_view target,
                                           const std::vector<std::string>& labels, std::string name) {
  const auto& sig = raw_.signature;
  if (labels.size() != sig.size())
    throw InputError("automaton '" + raw_.name + "': motion " + std::string(source) + " -> " +
                     std::string(target) + " has " + std::to_string(labels.size()) + " labels, expected " +
                     std::to_string(sig.size()));
  RawMotion m;
  m.source = state_id(source);
  m.target = state_id(target);
  m.name = std::move(name);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto a = sig[i].find(labels[i]);
    if (!a)
      throw InputError("automaton '" + raw_.name + "': '" + labels[i] + "' is not an action of " +
                       sig[i].name());
    m.labels.push_back(*a);
  }
  raw_.motions.push_back(std::move(m));
  return *this;
}

AutomatonBuilder& AutomatonBuilder::initial(std::string_view state) {
  raw_.initial = state_id(state);
  return *this;
}

RawAutomaton AutomatonBuilder::raw() const {
  RawAutomaton r = raw_;
  r.reflexive_of.clear();
  for (StateId s = 0; s < r.states.size(); ++s) {
    r.reflexive_of.push_back(static_cast<MotionId>(r.motions.size()));
    r.motions.push_back({s, s, std::vector<ActionId>(r.signature.size(), kTau), true, {}});
  }
  return r;
}

}  // namespace awb
