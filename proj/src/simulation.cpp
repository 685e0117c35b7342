#include "awb/simulation.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "awb/algebra.hpp"
#include "awb/checker.hpp"
#include "awb/error.hpp"

namespace awb {

std::vector<char> comparison_state_domain(const Automaton& source) {
  std::vector<char> in(source.num_states(), 0);
  if (!source.initial()) {
    std::fill(in.begin(), in.end(), 1);
    return in;
  }
  for (StateId v : reachable_states(source, *source.initial())) in[v] = 1;
  return in;
}

std::vector<Violation> verify_comparison(const Comparison& f) {
  const auto& s = f.source;
  const auto& t = f.target;
  if (s.signature().boundaries != t.signature().boundaries)
    throw InputError("comparison from '" + s.name() + "' to '" + t.name() + "': boundary signatures differ (" +
                     s.signature().to_string() + " vs " + t.signature().to_string() + ")");
  std::vector<Violation> out;
  if (f.state_map.size() != s.num_states() || f.motion_map.size() != s.num_motions()) {
    out.push_back({"map sizes do not match the source automaton", {}, {}});
    return out;
  }
  const auto dom = comparison_state_domain(s);
  const auto codom = comparison_state_domain(t);
  for (StateId v = 0; v < s.num_states(); ++v) {
    if (!dom[v]) continue;
    const StateId w = f.state_map[v];
    if (w >= t.num_states()) {
      out.push_back({"state " + s.state_name(v) + " is not mapped", {}, v});
      continue;
    }
    if (!codom[w])
      out.push_back({"state " + s.state_name(v) + " maps to unreachable state " + t.state_name(w), {}, v});
  }
  if (!out.empty()) return out;
  for (MotionId m = 0; m < s.num_motions(); ++m) {
    if (!dom[s.source(m)]) continue;
    const MotionId n = f.motion_map[m];
    const std::string what = "motion " + s.motion_name(m);
    if (n >= t.num_motions()) {
      out.push_back({what + " is not mapped", m, {}});
      continue;
    }
    if (t.source(n) != f.state_map[s.source(m)] || t.target(n) != f.state_map[s.target(m)])
      out.push_back({what + " maps to " + t.motion_name(n) + ", whose endpoints do not match", m, {}});
    if (s.is_reflexive(m) && !t.is_reflexive(n))
      out.push_back({what + " is reflexive but maps to the nonreflexive " + t.motion_name(n), m, {}});
    for (std::size_t i = 0; i < s.arity(); ++i) {
      if (s.label(m, i) != t.label(n, i)) {
        out.push_back({what + " carries " + s.signature()[i].action_name(s.label(m, i)) + " on boundary " +
                           std::to_string(i) + " but its image " + t.motion_name(n) + " carries " +
                           t.signature()[i].action_name(t.label(n, i)),
                       m, {}});
        break;
      }
    }
  }
  if (s.initial() && t.initial() && f.state_map[*s.initial()] != *t.initial())
    out.push_back({"initial state " + s.state_name(*s.initial()) + " does not map to the initial state", {},
                   *s.initial()});
  return out;
}

Comparison infer_comparison(const Automaton& source, const Automaton& target, std::vector<StateId> state_map,
                            const std::map<MotionId, MotionId>& fixed) {
  if (state_map.size() != source.num_states())
    throw InputError("comparison: state map has the wrong size");
  Comparison f{source, target, std::move(state_map), std::vector<MotionId>(source.num_motions(), kNone)};
  const auto dom = comparison_state_domain(source);
  for (MotionId m = 0; m < source.num_motions(); ++m) {
    if (!dom[source.source(m)]) continue;
    if (auto it = fixed.find(m); it != fixed.end()) {
      f.motion_map[m] = it->second;
      continue;
    }
    const StateId a = f.state_map[source.source(m)], b = f.state_map[source.target(m)];
    if (a >= target.num_states() || b >= target.num_states())
      throw InputError("comparison: state " + source.state_name(source.source(m)) + " or " +
                       source.state_name(source.target(m)) + " is not mapped");
    if (source.is_reflexive(m)) {
      f.motion_map[m] = target.reflexive_of(a);
      continue;
    }
    std::vector<MotionId> hits;
    for (MotionId n : target.out(a)) {
      if (target.target(n) != b) continue;
      bool same = true;
      for (std::size_t i = 0; i < source.arity() && same; ++i) same = source.label(m, i) == target.label(n, i);
      if (same) hits.push_back(n);
    }
    if (hits.size() != 1)
      throw InputError("comparison: motion " + source.motion_name(m) + " has " + std::to_string(hits.size()) +
                       " candidate images; give it explicitly");
    f.motion_map[m] = hits[0];
  }
  return f;
}

SimulationCheck check_simulation(const Comparison& f) {
  SimulationCheck out;
  out.violations = verify_comparison(f);
  if (!out.violations.empty()) return out;
  const auto& s = f.source;
  const auto& t = f.target;
  const auto dom = comparison_state_domain(s);

  std::vector<Lifting> cert;
  std::vector<MotionId> via(s.num_states(), kNone);  // fiber BFS parent motion
  std::vector<StateId> stamp(s.num_states(), kNone);
  for (StateId v = 0; v < s.num_states(); ++v) {
    if (!dom[v]) continue;
    const StateId fv = f.state_map[v];
    const MotionId idle = t.reflexive_of(fv);
    // Fiber over the reflexive motion at f(v), searched from v.
    std::vector<StateId> fiber{v};
    stamp[v] = v;
    via[v] = kNone;
    std::map<MotionId, std::pair<StateId, MotionId>> found;  // target motion -> (fiber state, last step)
    for (std::size_t i = 0; i < fiber.size(); ++i) {
      const StateId x = fiber[i];
      for (MotionId m : s.out(x)) {
        const MotionId img = f.motion_map[m];
        found.emplace(img, std::pair{x, m});
        if (img == idle && stamp[s.target(m)] != v) {
          stamp[s.target(m)] = v;
          via[s.target(m)] = m;
          fiber.push_back(s.target(m));
        }
      }
    }
    for (MotionId e : t.out(fv)) {
      auto it = found.find(e);
      if (it == found.end()) {
        out.counterexample = std::pair{v, e};
        return out;
      }
      Behaviour b{v, {it->second.second}};
      for (StateId x = it->second.first; x != v; x = s.source(via[x])) b.steps.push_back(via[x]);
      std::reverse(b.steps.begin(), b.steps.end());
      cert.push_back({v, e, std::move(b)});
    }
  }
  out.simulation = Simulation(f, std::move(cert));
  return out;
}

std::string SimulationCheck::describe(const Comparison& f) const {
  if (ok()) return "verified";
  if (!violations.empty()) {
    std::string msg = "not a comparison:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    return msg;
  }
  auto [v, e] = *counterexample;
  return "lifting fails: from state " + f.source.state_name(v) + " (image " +
         f.target.state_name(f.state_map[v]) + ") no behaviour lifts target motion " + f.target.motion_name(e);
}

Simulation verify_simulation(const Comparison& f, const std::string& what) {
  auto check = check_simulation(f);
  if (!check.ok()) throw InputError(what + " is not a simulation: " + check.describe(f));
  return std::move(*check.simulation);
}

Simulation identity_simulation(const Automaton& a) {
  Comparison f{a, a, std::vector<StateId>(a.num_states(), kNone), std::vector<MotionId>(a.num_motions(), kNone)};
  const auto dom = comparison_state_domain(a);
  for (StateId v = 0; v < a.num_states(); ++v)
    if (dom[v]) f.state_map[v] = v;
  for (MotionId m = 0; m < a.num_motions(); ++m)
    if (dom[a.source(m)]) f.motion_map[m] = m;
  return verify_simulation(f, "identity on '" + a.name() + "'");
}

bool same_automaton(const Automaton& a, const Automaton& b) {
  if (a.same_object(b)) return true;
  const auto& x = a.data();
  const auto& y = b.data();
  return x.signature.boundaries == y.signature.boundaries && x.num_states == y.num_states &&
         x.source == y.source && x.target == y.target && x.labels == y.labels && x.reflexive_of == y.reflexive_of &&
         x.initial == y.initial;
}

Simulation compose(const Simulation& f, const Simulation& g) {
  if (!same_automaton(f.target(), g.source()))
    throw InputError("compose: target of the first simulation ('" + f.target().name() +
                     "') is not the source of the second ('" + g.source().name() + "')");
  const auto& s = f.source();
  Comparison h{s, g.target(), std::vector<StateId>(s.num_states(), kNone),
               std::vector<MotionId>(s.num_motions(), kNone)};
  for (StateId v = 0; v < s.num_states(); ++v)
    if (f.state(v) != kNone) h.state_map[v] = g.state(f.state(v));
  for (MotionId m = 0; m < s.num_motions(); ++m)
    if (f.motion(m) != kNone) h.motion_map[m] = g.motion(f.motion(m));
  return verify_simulation(h, "composite");
}

namespace {

// Maps of a pairwise composite (bind or product) from the maps of its operands.
Comparison pair_comparison(const Automaton& src, const Automaton& tgt, const Simulation& f, const Simulation& g) {
  Comparison h{src, tgt, std::vector<StateId>(src.num_states(), kNone),
               std::vector<MotionId>(src.num_motions(), kNone)};
  const StateId nu = g.source().num_states();
  const StateId nv = g.target().num_states();
  const auto& sd = src.data();
  const auto& td = tgt.data();
  const auto dom = comparison_state_domain(src);
  for (StateId x = 0; x < src.num_states(); ++x) {
    if (!dom[x]) continue;
    const StateId a = f.state(x / nu), b = g.state(x % nu);
    if (a == kNone || b == kNone) throw std::logic_error("composite simulation: operand map undefined");
    const StateId y = a * nv + b;
    h.state_map[x] = y;
    for (MotionId m : src.out(x)) {
      const MotionId e = f.motion(sd.tag_left[m]), e2 = g.motion(sd.tag_right[m]);
      for (MotionId n : tgt.out(y))
        if (td.tag_left[n] == e && td.tag_right[n] == e2) {
          h.motion_map[m] = n;
          break;
        }
    }
  }
  return h;
}

}  // namespace

Simulation bind_sim(const Simulation& f, const Simulation& g, std::size_t j, std::size_t k) {
  auto src = bind(f.source(), g.source(), j, k);
  auto tgt = bind(f.target(), g.target(), j, k);
  return verify_simulation(pair_comparison(src, tgt, f, g), "bound simulation");
}

Simulation product_sim(const Simulation& f, const Simulation& g) {
  auto src = product(f.source(), g.source());
  auto tgt = product(f.target(), g.target());
  return verify_simulation(pair_comparison(src, tgt, f, g), "product simulation");
}

Simulation fb_sim(const Simulation& f, std::size_t j, std::size_t k) {
  auto src = feedback(f.source(), j, k);
  auto tgt = feedback(f.target(), j, k);
  Comparison h{src, tgt, std::vector<StateId>(src.num_states(), kNone),
               std::vector<MotionId>(src.num_motions(), kNone)};
  const auto& tags = tgt.data().tag_left;
  const auto dom = comparison_state_domain(src);
  for (StateId v = 0; v < src.num_states(); ++v)
    if (dom[v]) h.state_map[v] = f.state(v);
  for (MotionId m = 0; m < src.num_motions(); ++m) {
    if (!dom[src.source(m)]) continue;
    const MotionId e = f.motion(src.data().tag_left[m]);
    auto it = std::lower_bound(tags.begin(), tags.end(), e);
    if (it != tags.end() && *it == e) h.motion_map[m] = static_cast<MotionId>(it - tags.begin());
  }
  return verify_simulation(h, "fed back simulation");
}

Simulation opposite_sim(const Simulation& f) {
  Comparison h = f.comparison();
  h.source = opposite(f.source());
  h.target = opposite(f.target());
  return verify_simulation(h, "opposite simulation");
}

namespace {

Simulation lift_node(const Design& d, const System& src, const System& tgt,
                     const std::map<std::string, Simulation>& given, std::size_t& next) {
  const auto& n = d.node();
  switch (n.kind) {
    case Design::Kind::kVar:
    case Design::Kind::kIdentity:
    case Design::Kind::kDiagonal: {
      const std::size_t c = next++;
      const auto& comp = src.diagram().components[c];
      const Automaton& a = src.automaton(c);
      const Automaton& b = tgt.automaton(c);
      const Simulation* sim = nullptr;
      if (auto it = given.find(comp.name); it != given.end()) sim = &it->second;
      else if (comp.var && given.count(*comp.var)) sim = &given.at(*comp.var);
      if (sim) {
        if (!same_automaton(sim->source(), a) || !same_automaton(sim->target(), b))
          throw InputError("lift: simulation for '" + comp.name + "' goes from '" + sim->source().name() +
                           "' to '" + sim->target().name() + "' but the component carries '" + a.name() +
                           "' and '" + b.name() + "'");
        return *sim;
      }
      if (!same_automaton(a, b))
        throw InputError("lift: component '" + comp.name + "' differs between the systems ('" + a.name() +
                         "' vs '" + b.name() + "') and no simulation was given for it");
      return identity_simulation(a);
    }
    case Design::Kind::kBind: {
      auto l = lift_node(n.children[0], src, tgt, given, next);
      auto r = lift_node(n.children[1], src, tgt, given, next);
      return bind_sim(l, r, n.j, n.k);
    }
    case Design::Kind::kFeedback:
      return fb_sim(lift_node(n.children[0], src, tgt, given, next), n.j, n.k);
    case Design::Kind::kProduct: {
      auto l = lift_node(n.children[0], src, tgt, given, next);
      auto r = lift_node(n.children[1], src, tgt, given, next);
      return product_sim(l, r);
    }
    case Design::Kind::kOpposite:
      return opposite_sim(lift_node(n.children[0], src, tgt, given, next));
  }
  throw std::logic_error("lift: unknown design node");
}

}  // namespace

Simulation lift_simulation(const System& source, const System& target,
                           const std::map<std::string, Simulation>& per_variable) {
  if (!source.design().same_shape(target.design()))
    throw InputError("lift: systems '" + source.name() + "' and '" + target.name() + "' have different designs");
  for (const auto& [name, sim] : per_variable) {
    bool known = source.find_component(name).has_value();
    for (const auto& c : source.diagram().components) known = known || c.var == name;
    if (!known) throw InputError("lift: no component or variable named '" + name + "'");
  }
  std::size_t next = 0;
  return lift_node(source.design(), source, target, per_variable, next);
}

PreimageResult preimage_deadlock_check(const Simulation& f, const std::vector<StateId>& target_deadlocks) {
  std::set<StateId> dead(target_deadlocks.begin(), target_deadlocks.end());
  for (StateId d : dead)
    if (d >= f.target().num_states()) throw InputError("preimage: target deadlock out of range");
  PreimageResult out;
  const auto& s = f.source();
  for (StateId v = 0; v < s.num_states(); ++v) {
    if (f.state(v) == kNone || !dead.count(f.state(v))) continue;
    out.preimage.push_back(v);
    if (is_deadlock(s, v)) out.deadlocks.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using Letter = std::vector<ActionId>;
using Subset = std::vector<StateId>;

struct Determinizer {
  const Automaton& a;
  std::vector<std::size_t> boundaries;

  Letter letter(MotionId m) const {
    Letter l;
    for (std::size_t i : boundaries) l.push_back(a.label(m, i));
    return l;
  }
  static bool silent(const Letter& l) {
    return std::all_of(l.begin(), l.end(), [](ActionId x) { return x == kTau; });
  }

  Subset closure(Subset seed) const {
    std::vector<char> in(a.num_states(), 0);
    for (StateId v : seed) in[v] = 1;
    for (std::size_t i = 0; i < seed.size(); ++i)
      for (MotionId m : a.out(seed[i]))
        if (!in[a.target(m)] && silent(letter(m))) {
          in[a.target(m)] = 1;
          seed.push_back(a.target(m));
        }
    std::sort(seed.begin(), seed.end());
    return seed;
  }

  std::map<Letter, Subset> step(const Subset& from) const {
    std::map<Letter, Subset> raw;
    for (StateId v : from)
      for (MotionId m : a.out(v)) {
        Letter l = letter(m);
        if (!silent(l)) raw[l].push_back(a.target(m));
      }
    for (auto& [l, set] : raw) {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      set = closure(std::move(set));
    }
    return raw;
  }
};

}  // namespace

LanguageCheck reduced_language_equiv(const Automaton& s, const Automaton& t, const std::vector<std::size_t>& boundaries,
                                     std::optional<std::size_t> max_len) {
  if (s.signature().boundaries != t.signature().boundaries)
    throw InputError("language comparison: signatures differ (" + s.signature().to_string() + " vs " +
                     t.signature().to_string() + ")");
  if (!s.initial() || !t.initial()) throw InputError("language comparison needs initial states");
  std::vector<std::size_t> sel = boundaries;
  if (sel.empty())
    for (std::size_t i = 0; i < s.arity(); ++i) sel.push_back(i);
  for (std::size_t i : sel)
    if (i >= s.arity()) throw InputError("language comparison: boundary " + std::to_string(i) + " out of range");

  Determinizer ds{s, sel}, dt{t, sel};
  using Pair = std::pair<Subset, Subset>;
  struct Node {
    Pair sets;
    std::size_t depth;
    std::vector<Letter> word;
  };
  std::set<Pair> seen;
  std::deque<Node> queue;
  Pair start{ds.closure({*s.initial()}), dt.closure({*t.initial()})};
  seen.insert(start);
  queue.push_back({start, 0, {}});
  LanguageCheck out;
  while (!queue.empty()) {
    Node n = std::move(queue.front());
    queue.pop_front();
    if (max_len && n.depth >= *max_len) continue;
    auto ls = ds.step(n.sets.first);
    auto lt = dt.step(n.sets.second);
    auto li = ls.begin();
    auto ti = lt.begin();
    // Walk both letter maps in order; a letter in only one is a counterexample.
    while (li != ls.end() || ti != lt.end()) {
      if (ti == lt.end() || (li != ls.end() && li->first < ti->first)) {
        out.equivalent = false;
        out.counterexample = n.word;
        out.counterexample.push_back(li->first);
        out.in_left = true;
        return out;
      }
      if (li == ls.end() || ti->first < li->first) {
        out.equivalent = false;
        out.counterexample = n.word;
        out.counterexample.push_back(ti->first);
        out.in_left = false;
        return out;
      }
      Pair next{li->second, ti->second};
      if (seen.insert(next).second) {
        auto word = n.word;
        word.push_back(li->first);
        queue.push_back({std::move(next), n.depth + 1, std::move(word)});
      }
      ++li;
      ++ti;
    }
  }
  return out;
}

}  // namespace awb
