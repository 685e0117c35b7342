#include "awb/design.hpp"

#include <algorithm>

#include "awb/algebra.hpp"
#include "awb/core.hpp"
#include "awb/error.hpp"

namespace awb {

namespace {

std::string describe(const Design& d) {
  std::string s = d.to_string();
  if (s.size() > 80) s = s.substr(0, 77) + "...";
  return s;
}

}  // namespace

Design Design::var(std::string name, Automaton a) {
  if (name.empty()) throw InputError("design variable needs a name");
  if (!a.valid()) throw InputError("design variable '" + name + "' has no automaton");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kVar;
  n->var = std::move(name);
  n->signature = a.signature();
  n->automaton = std::move(a);
  return Design(std::move(n));
}

Design Design::bind(Design left, Design right) {
  const auto& ls = left.signature();
  const auto& rs = right.signature();
  if (ls.size() == 0 || rs.size() == 0)
    throw InputError("bind of '" + describe(left) + "' and '" + describe(right) + "': an operand has no boundary");
  return bind(std::move(left), std::move(right), ls.size() - 1, 0);
}

Design Design::bind(Design left, Design right, std::size_t j, std::size_t k) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kBind;
  n->j = j;
  n->k = k;
  try {
    n->signature = bind_signature(left.signature(), right.signature(), j, k);
  } catch (const InputError& e) {
    throw InputError("in '" + describe(left) + " ;<" + std::to_string(j) + "," + std::to_string(k) + "> " +
                     describe(right) + "': " + e.what());
  }
  n->children = {std::move(left), std::move(right)};
  return Design(std::move(n));
}

Design Design::feedback(Design child, std::size_t j, std::size_t k) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kFeedback;
  n->j = j;
  n->k = k;
  try {
    n->signature = feedback_signature(child.signature(), j, k);
  } catch (const InputError& e) {
    throw InputError("in 'fb<" + std::to_string(j) + "," + std::to_string(k) + ">(" + describe(child) +
                     ")': " + e.what());
  }
  n->children = {std::move(child)};
  return Design(std::move(n));
}

Design Design::product(Design left, Design right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kProduct;
  n->signature = product_signature(left.signature(), right.signature());
  n->children = {std::move(left), std::move(right)};
  return Design(std::move(n));
}

Design Design::identity(const ActionSet& x) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kIdentity;
  n->type = x;
  n->automaton = identity_automaton(x);
  n->signature = n->automaton.signature();
  return Design(std::move(n));
}

Design Design::diagonal(const ActionSet& x) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kDiagonal;
  n->type = x;
  n->automaton = diagonal_automaton(x);
  n->signature = n->automaton.signature();
  return Design(std::move(n));
}

Design Design::opposite(Design child) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kOpposite;
  try {
    n->signature = opposite_signature(child.signature());
  } catch (const InputError& e) {
    throw InputError("in 'op(" + describe(child) + ")': " + e.what());
  }
  n->children = {std::move(child)};
  return Design(std::move(n));
}

std::string Design::to_string() const {
  const Node& n = *node_;
  auto idx = [](std::size_t a, std::size_t b) { return std::to_string(a) + "," + std::to_string(b); };
  switch (n.kind) {
    case Kind::kVar:
      return n.var + ":" + n.automaton.name();
    case Kind::kBind: {
      const auto& l = n.children[0];
      bool dflt = n.j + 1 == l.signature().size() && n.k == 0;
      return "(" + l.to_string() + (dflt ? " ; " : " ;<" + idx(n.j, n.k) + "> ") + n.children[1].to_string() +
             ")";
    }
    case Kind::kFeedback:
      return "fb<" + idx(n.j, n.k) + ">(" + n.children[0].to_string() + ")";
    case Kind::kProduct:
      return "(" + n.children[0].to_string() + " * " + n.children[1].to_string() + ")";
    case Kind::kIdentity:
      return "id<" + n.type->name() + ">";
    case Kind::kDiagonal:
      return "diag<" + n.type->name() + ">";
    case Kind::kOpposite:
      return "op(" + n.children[0].to_string() + ")";
  }
  return {};
}

bool Design::same_shape(const Design& other) const {
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind || a.j != b.j || a.k != b.k || a.var != b.var) return false;
  if (a.type.has_value() != b.type.has_value() || (a.type && !(*a.type == *b.type))) return false;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!a.children[i].same_shape(b.children[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

struct Flattener {
  WiringDiagram out;

  std::vector<Port> walk(const Design& d) {
    const auto& n = d.node();
    switch (n.kind) {
      case Design::Kind::kVar:
      case Design::Kind::kIdentity:
      case Design::Kind::kDiagonal: {
        const std::size_t c = out.components.size();
        Component comp;
        if (n.kind == Design::Kind::kVar) {
          comp.name = n.var;
          comp.var = n.var;
        } else {
          comp.name = (n.kind == Design::Kind::kIdentity ? "id<" : "diag<") + n.type->name() + ">";
        }
        comp.automaton = n.automaton;
        out.components.push_back(std::move(comp));
        std::vector<Port> ports;
        for (std::size_t i = 0; i < n.signature.size(); ++i) ports.push_back({c, i});
        return ports;
      }
      case Design::Kind::kBind: {
        auto l = walk(n.children[0]);
        auto r = walk(n.children[1]);
        add_wire(l[n.j], r[n.k]);
        std::vector<Port> ports;
        for (std::size_t i = 0; i < l.size(); ++i)
          if (i != n.j) ports.push_back(l[i]);
        for (std::size_t i = 0; i < r.size(); ++i)
          if (i != n.k) ports.push_back(r[i]);
        return ports;
      }
      case Design::Kind::kFeedback: {
        auto c = walk(n.children[0]);
        add_wire(c[n.j], c[n.k]);
        std::vector<Port> ports;
        for (std::size_t i = 0; i < c.size(); ++i)
          if (i != n.j && i != n.k) ports.push_back(c[i]);
        return ports;
      }
      case Design::Kind::kProduct: {
        auto l = walk(n.children[0]);
        auto r = walk(n.children[1]);
        l.insert(l.end(), r.begin(), r.end());
        return l;
      }
      case Design::Kind::kOpposite: {
        auto c = walk(n.children[0]);
        std::vector<Port> ports;
        for (std::size_t p : opposite_permutation(n.children[0].signature())) ports.push_back(c[p]);
        return ports;
      }
    }
    return {};
  }

  void add_wire(Port a, Port b) {
    if (b < a) std::swap(a, b);
    out.wires.push_back({a, b});
  }
};

}  // namespace

WiringDiagram flatten(const Design& d) {
  if (!d.valid()) throw InputError("flatten: empty design");
  Flattener f;
  f.out.open_ports = f.walk(d);
  auto& comps = f.out.components;

  // Disambiguate repeated names by occurrence.
  std::map<std::string, int> total, seen;
  for (const auto& c : comps) ++total[c.name];
  for (auto& c : comps)
    if (total[c.name] > 1) c.name += "#" + std::to_string(++seen[c.name]);

  std::sort(f.out.wires.begin(), f.out.wires.end());
  f.out.peer.resize(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) f.out.peer[c].resize(comps[c].automaton.arity());
  for (const auto& w : f.out.wires) {
    f.out.peer[w.a.component][w.a.boundary] = w.b;
    f.out.peer[w.b.component][w.b.boundary] = w.a;
  }
  return std::move(f.out);
}

// ---------------------------------------------------------------------------

System::System(std::string name, Design design, std::map<std::string, Automaton> overrides)
    : name_(std::move(name)), design_(std::move(design)), overrides_(std::move(overrides)) {
  diagram_ = flatten(design_);
  std::map<std::string, BoundarySignature> var_sig;
  for (const auto& c : diagram_.components) {
    if (!c.var) continue;
    auto [it, fresh] = var_sig.emplace(*c.var, c.automaton.signature());
    if (!fresh && it->second.boundaries != c.automaton.signature().boundaries)
      throw InputError("system '" + name_ + "': variable '" + *c.var + "' used with different signatures");
  }
  for (const auto& [var, a] : overrides_) {
    auto it = var_sig.find(var);
    if (it == var_sig.end()) throw InputError("system '" + name_ + "': no variable named '" + var + "'");
    if (it->second.boundaries != a.signature().boundaries)
      throw InputError("system '" + name_ + "': automaton '" + a.name() + "' has signature " +
                       a.signature().to_string() + " but variable '" + var + "' needs " + it->second.to_string());
  }
  for (const auto& c : diagram_.components) {
    Automaton a = c.var && overrides_.count(*c.var) ? overrides_.at(*c.var) : c.automaton;
    if (!a.initial())
      throw InputError("system '" + name_ + "': automaton '" + a.name() + "' assigned to '" + c.name +
                       "' has no initial state");
    automata_.push_back(std::move(a));
  }
}

Automaton System::assignment(const std::string& var) const {
  if (auto it = overrides_.find(var); it != overrides_.end()) return it->second;
  for (const auto& c : diagram_.components)
    if (c.var == var) return c.automaton;
  throw InputError("system '" + name_ + "': no variable named '" + var + "'");
}

GlobalState System::initial() const {
  GlobalState g;
  for (const auto& a : automata_) g.push_back(*a.initial());
  return g;
}

bool System::all_linear() const {
  return std::all_of(automata_.begin(), automata_.end(), [](const Automaton& a) { return is_linear(a); });
}

std::optional<std::size_t> System::find_component(std::string_view name) const {
  for (std::size_t c = 0; c < diagram_.components.size(); ++c)
    if (diagram_.components[c].name == name) return c;
  return std::nullopt;
}

std::string System::render_state(const GlobalState& g) const {
  std::vector<std::string> parts;
  for (std::size_t c = 0; c < g.size(); ++c) parts.push_back(automata_[c].state_name(g[c]));
  return "(" + [&] {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
    return s;
  }() + ")";
}

std::string System::render_motion(std::span<const MotionId> m) const {
  std::string s = "(";
  for (std::size_t c = 0; c < m.size(); ++c) s += (c ? "," : "") + automata_[c].motion_name(m[c]);
  return s + ")";
}

namespace {

Automaton eval_node(const Design& d, const System& sys, std::size_t& next) {
  const auto& n = d.node();
  switch (n.kind) {
    case Design::Kind::kVar:
    case Design::Kind::kIdentity:
    case Design::Kind::kDiagonal:
      return sys.automaton(next++);
    case Design::Kind::kBind: {
      auto l = eval_node(n.children[0], sys, next);
      auto r = eval_node(n.children[1], sys, next);
      return bind(l, r, n.j, n.k);
    }
    case Design::Kind::kFeedback:
      return feedback(eval_node(n.children[0], sys, next), n.j, n.k);
    case Design::Kind::kProduct: {
      auto l = eval_node(n.children[0], sys, next);
      auto r = eval_node(n.children[1], sys, next);
      return product(l, r);
    }
    case Design::Kind::kOpposite:
      return opposite(eval_node(n.children[0], sys, next));
  }
  return {};
}

}  // namespace

Automaton evaluate(const System& sys) {
  std::size_t next = 0;
  return eval_node(sys.design(), sys, next);
}

// ---------------------------------------------------------------------------

const char* to_string(Mode m) { return m == Mode::kAll ? "all" : "atomic"; }

Mode parse_mode(std::string_view s) {
  if (s == "all") return Mode::kAll;
  if (s == "atomic") return Mode::kAtomic;
  throw InputError("unknown mode '" + std::string(s) + "' (expected all or atomic)");
}

void check_mode(const System& sys, Mode mode) {
  if (mode != Mode::kAtomic) return;
  if (!sys.is_closed())
    throw InputError("atomic mode needs a closed system; '" + sys.name() + "' has " +
                     std::to_string(sys.diagram().open_ports.size()) + " open ports");
  for (std::size_t c = 0; c < sys.size(); ++c)
    if (!is_linear(sys.automaton(c)))
      throw InputError("atomic mode needs linear components; '" + sys.diagram().components[c].name +
                       "' is not linear");
}

namespace {

struct Enumerator {
  const System& sys;
  const GlobalState& g;
  const ComponentMask& mask;
  const std::function<bool(std::span<const MotionId>, const GlobalState&)>& visit;
  std::vector<std::vector<MotionId>> domain;
  std::vector<MotionId> choice;
  GlobalState target;

  bool active(std::size_t c) const { return mask.empty() || mask[c]; }

  void init() {
    const std::size_t n = sys.size();
    domain.resize(n);
    choice.resize(n);
    target.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& a = sys.automaton(c);
      if (active(c))
        for (MotionId m : a.out(g[c])) domain[c].push_back(m);
      else
        domain[c].push_back(a.reflexive_of(g[c]));
    }
  }

  bool emit() {
    bool trivial = true;
    for (std::size_t c = 0; c < choice.size() && trivial; ++c)
      trivial = sys.automaton(c).is_reflexive(choice[c]);
    if (trivial) return true;
    for (std::size_t c = 0; c < choice.size(); ++c) target[c] = sys.automaton(c).target(choice[c]);
    return visit(choice, target);
  }

  bool all(std::size_t c) {
    if (c == sys.size()) return emit();
    const auto& a = sys.automaton(c);
    const auto& peers = sys.diagram().peer[c];
    for (MotionId m : domain[c]) {
      bool ok = true;
      std::vector<std::pair<std::size_t, std::vector<MotionId>>> saved;
      for (std::size_t i = 0; i < peers.size() && ok; ++i) {
        if (!peers[i]) continue;
        const Port p = *peers[i];
        const ActionId l = a.label(m, i);
        if (p.component == c) {
          ok = a.label(m, p.boundary) == l;
        } else if (p.component > c) {
          const auto& b = sys.automaton(p.component);
          std::vector<MotionId> kept;
          for (MotionId x : domain[p.component])
            if (b.label(x, p.boundary) == l) kept.push_back(x);
          if (kept.empty()) ok = false;
          saved.emplace_back(p.component, std::move(domain[p.component]));
          domain[p.component] = std::move(kept);
        }
      }
      bool go_on = true;
      if (ok) {
        choice[c] = m;
        go_on = all(c + 1);
      }
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) domain[it->first] = std::move(it->second);
      if (!go_on) return false;
    }
    return true;
  }

  bool atomic() {
    const std::size_t n = sys.size();
    for (std::size_t c = 0; c < n; ++c) choice[c] = sys.automaton(c).reflexive_of(g[c]);
    auto reset = [&](std::size_t c) { choice[c] = sys.automaton(c).reflexive_of(g[c]); };
    // Single components moving without touching any wired boundary.
    for (std::size_t c = 0; c < n; ++c) {
      if (!active(c)) continue;
      const auto& a = sys.automaton(c);
      const auto& peers = sys.diagram().peer[c];
      for (MotionId m : a.out(g[c])) {
        if (a.is_reflexive(m)) continue;
        bool ok = true;
        for (std::size_t i = 0; i < peers.size() && ok; ++i)
          if (peers[i] && a.label(m, i) != kTau) ok = false;
        if (!ok) continue;
        choice[c] = m;
        bool go_on = emit();
        reset(c);
        if (!go_on) return false;
      }
    }
    // Two components synchronizing across one wire.
    for (const auto& w : sys.diagram().wires) {
      const std::size_t c = w.a.component, d = w.b.component;
      if (c == d || !active(c) || !active(d)) continue;
      const auto& a = sys.automaton(c);
      const auto& b = sys.automaton(d);
      for (MotionId m : a.out(g[c])) {
        const ActionId l = a.label(m, w.a.boundary);
        if (l == kTau || !a.is_linear(m)) continue;
        for (MotionId x : b.out(g[d])) {
          if (b.label(x, w.b.boundary) != l || !b.is_linear(x)) continue;
          choice[c] = m;
          choice[d] = x;
          bool go_on = emit();
          reset(c);
          reset(d);
          if (!go_on) return false;
        }
      }
    }
    return true;
  }
};

}  // namespace

bool for_each_successor(const System& sys, const GlobalState& g, Mode mode, const ComponentMask& mask,
                        const std::function<bool(std::span<const MotionId>, const GlobalState&)>& visit) {
  if (g.size() != sys.size()) throw InputError("global state has wrong number of components");
  for (std::size_t c = 0; c < g.size(); ++c)
    if (g[c] >= sys.automaton(c).num_states()) throw InputError("global state has an invalid local state");
  if (!mask.empty() && mask.size() != sys.size()) throw InputError("component mask has wrong size");
  Enumerator e{sys, g, mask, visit, {}, {}, {}};
  e.init();
  if (mode == Mode::kAtomic) return e.atomic();
  return e.all(0);
}

std::vector<Successor> successors(const System& sys, const GlobalState& g, Mode mode, const ComponentMask& mask) {
  check_mode(sys, mode);
  std::vector<Successor> out;
  for_each_successor(sys, g, mode, mask, [&](std::span<const MotionId> m, const GlobalState& t) {
    out.push_back({{m.begin(), m.end()}, t});
    return true;
  });
  return out;
}

bool has_successor(const System& sys, const GlobalState& g, Mode mode, const ComponentMask& mask) {
  return !for_each_successor(sys, g, mode, mask, [](auto, const auto&) { return false; });
}

std::vector<ActionId> open_labels(const System& sys, std::span<const MotionId> motion) {
  std::vector<ActionId> out;
  for (const Port& p : sys.diagram().open_ports) out.push_back(sys.automaton(p.component).label(motion[p.component], p.boundary));
  return out;
}

std::vector<StateId> project_local(const System& sys, const GlobalState& g,
                                   const std::vector<std::size_t>& subsystem) {
  if (subsystem.empty()) throw InputError("projection onto an empty subsystem");
  std::vector<std::size_t> sorted = subsystem;
  std::sort(sorted.begin(), sorted.end());
  std::vector<StateId> out;
  for (std::size_t c : sorted) {
    if (c >= sys.size() || c >= g.size()) throw InputError("projection: component index out of range");
    out.push_back(g[c]);
  }
  return out;
}

}  // namespace awb
