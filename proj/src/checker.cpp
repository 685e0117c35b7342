#include "awb/checker.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "awb/core.hpp"
#include "awb/error.hpp"

namespace awb {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Insert-once store of fixed-width global states with parent pointers.
class StateTable {
 public:
  StateTable(std::size_t width, bool keep_motions)
      : width_(width), keep_motions_(keep_motions), index_(64, Hash{this}, Eq{this}) {}

  std::size_t size() const { return parent_.size(); }

  std::span<const StateId> state(std::size_t i) const { return {data_.data() + i * width_, width_}; }
  GlobalState global(std::size_t i) const {
    auto s = state(i);
    return {s.begin(), s.end()};
  }

  // Returns (index, inserted).
  std::pair<std::size_t, bool> insert(std::span<const StateId> g, std::size_t parent,
                                      std::span<const MotionId> motion) {
    data_.insert(data_.end(), g.begin(), g.end());
    const auto id = static_cast<std::uint32_t>(parent_.size());
    auto [it, fresh] = index_.insert(id);
    if (!fresh) {
      data_.resize(data_.size() - width_);
      return {*it, false};
    }
    parent_.push_back(parent);
    if (keep_motions_) {
      if (motion.empty()) motions_.insert(motions_.end(), width_, kNone);
      else motions_.insert(motions_.end(), motion.begin(), motion.end());
    }
    return {id, true};
  }

  std::vector<std::vector<MotionId>> path_to(std::size_t i) const {
    std::vector<std::vector<MotionId>> out;
    while (parent_[i] != kNoParent) {
      out.emplace_back(motions_.begin() + i * width_, motions_.begin() + (i + 1) * width_);
      i = parent_[i];
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

 private:
  struct Hash {
    const StateTable* t;
    std::size_t operator()(std::uint32_t id) const {
      std::uint64_t h = 1469598103934665603ull;
      for (StateId x : t->state(id)) {
        h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  struct Eq {
    const StateTable* t;
    bool operator()(std::uint32_t a, std::uint32_t b) const {
      auto x = t->state(a), y = t->state(b);
      return std::equal(x.begin(), x.end(), y.begin());
    }
  };

  std::size_t width_;
  bool keep_motions_;
  std::vector<StateId> data_;
  std::vector<std::size_t> parent_;
  std::vector<MotionId> motions_;
  std::unordered_set<std::uint32_t, Hash, Eq> index_;
};

struct Expansion {
  bool deadlock = false;
  std::vector<std::vector<MotionId>> motions;
  std::vector<GlobalState> targets;
};

template <class Expand>
DeadlockReport explore(const System& sys, const CheckOptions& opt, const char* algorithm, Expand expand) {
  check_mode(sys, opt.mode);
  const auto t0 = Clock::now();
  DeadlockReport report;
  report.algorithm = algorithm;
  report.system = sys.name();
  report.mode = to_string(opt.mode);
  for (const auto& c : sys.diagram().components) report.component_names.push_back(c.name);

  StateTable table(sys.size(), opt.witnesses);
  std::vector<std::size_t> dead;
  table.insert(sys.initial(), StateTable::kNoParent, {});

  auto finish = [&](bool complete) {
    report.explored = table.size();
    report.complete = complete;
    std::vector<std::pair<std::vector<std::string>, std::size_t>> named;
    for (std::size_t i : dead) {
      std::vector<std::string> names;
      auto g = table.state(i);
      for (std::size_t c = 0; c < g.size(); ++c) names.push_back(sys.automaton(c).state_name(g[c]));
      named.emplace_back(std::move(names), i);
    }
    std::sort(named.begin(), named.end());
    for (auto& [names, i] : named) {
      report.deadlocks.push_back(table.global(i));
      report.deadlock_names.push_back(std::move(names));
    }
    if (opt.witnesses) {
      report.witnesses.emplace();
      report.witness_names.emplace();
      for (auto& [names, i] : named) {
        auto path = table.path_to(i);
        std::vector<std::string> steps;
        for (const auto& m : path) steps.push_back(sys.render_motion(m));
        report.witnesses->push_back(std::move(path));
        report.witness_names->push_back(std::move(steps));
      }
    }
    report.elapsed_ms = ms_since(t0);
  };

  auto overflow = [&] {
    finish(false);
    throw ResourceError("state budget of " + std::to_string(opt.max_states) + " exceeded", report);
  };

  auto absorb = [&](std::size_t from, Expansion& ex) {
    if (ex.deadlock) dead.push_back(from);
    std::vector<std::size_t> fresh;
    for (std::size_t k = 0; k < ex.targets.size(); ++k) {
      auto [id, inserted] = table.insert(ex.targets[k], from, ex.motions[k]);
      if (inserted) {
        fresh.push_back(id);
        if (opt.max_states && table.size() > opt.max_states) overflow();
      }
    }
    return fresh;
  };

  if (opt.order == Order::kLifo) {
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      Expansion ex = expand(table.global(i));
      auto fresh = absorb(i, ex);
      stack.insert(stack.end(), fresh.rbegin(), fresh.rend());
    }
    finish(true);
    return report;
  }

  const unsigned threads = std::max(1u, opt.threads);
  std::vector<std::size_t> frontier{0};
  while (!frontier.empty()) {
    std::vector<Expansion> results(frontier.size());
    std::vector<GlobalState> states(frontier.size());
    for (std::size_t i = 0; i < frontier.size(); ++i) states[i] = table.global(frontier[i]);
    if (threads == 1 || frontier.size() < 2 * threads) {
      for (std::size_t i = 0; i < frontier.size(); ++i) results[i] = expand(states[i]);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < frontier.size(); i += threads) results[i] = expand(states[i]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      auto fresh = absorb(frontier[i], results[i]);
      next.insert(next.end(), fresh.begin(), fresh.end());
    }
    frontier = std::move(next);
  }
  finish(true);
  return report;
}

void collect(const System& sys, const GlobalState& g, Mode mode, const ComponentMask& mask, Expansion& ex) {
  for_each_successor(sys, g, mode, mask, [&](std::span<const MotionId> m, const GlobalState& t) {
    ex.motions.emplace_back(m.begin(), m.end());
    ex.targets.push_back(t);
    return true;
  });
}

ComponentMask mask_of(const System& sys, const std::vector<std::size_t>& subset) {
  ComponentMask mask(sys.size(), 0);
  for (std::size_t c : subset) mask[c] = 1;
  return mask;
}

}  // namespace

DeadlockReport bfs_deadlocks(const System& sys, const CheckOptions& opt) {
  auto report = explore(sys, opt, "bfs", [&](const GlobalState& g) {
    Expansion ex;
    collect(sys, g, opt.mode, {}, ex);
    ex.deadlock = ex.targets.empty();
    return ex;
  });
  report.reachable = report.explored;
  return report;
}

DeadlockReport misa_deadlocks(const System& sys, const CheckOptions& opt) {
  return explore(sys, opt, "misa", [&](const GlobalState& g) {
    Expansion ex;
    std::vector<std::vector<std::size_t>> candidates = introspective_closures(sys, g);
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (const auto& sub : candidates) {
      if (subsystem_deadlocked(sys, g, sub, opt.mode)) continue;
      collect(sys, g, opt.mode, mask_of(sys, sub), ex);
      return ex;
    }
    // Every closure is deadlocked, hence so is the whole system.
    if (has_successor(sys, g, opt.mode))
      throw std::logic_error("misa: all introspective closures deadlocked at a live state " + sys.render_state(g));
    ex.deadlock = true;
    return ex;
  });
}

WatchSet watch_sets(const System& sys, const GlobalState& g) {
  WatchSet out(sys.size());
  for (std::size_t c = 0; c < sys.size(); ++c) {
    const auto& a = sys.automaton(c);
    for (std::size_t i = 0; i < a.arity(); ++i)
      for (MotionId m : a.out(g[c]))
        if (a.label(m, i) != kTau) {
          out[c].push_back(i);
          break;
        }
  }
  return out;
}

std::vector<std::vector<std::size_t>> watching_graph(const System& sys, const GlobalState& g) {
  auto watch = watch_sets(sys, g);
  std::vector<std::vector<std::size_t>> edges(sys.size());
  for (std::size_t c = 0; c < sys.size(); ++c) {
    for (std::size_t i : watch[c]) {
      const auto& p = sys.diagram().peer[c][i];
      if (p && p->component != c) edges[c].push_back(p->component);
    }
    std::sort(edges[c].begin(), edges[c].end());
    edges[c].erase(std::unique(edges[c].begin(), edges[c].end()), edges[c].end());
  }
  return edges;
}

std::vector<std::vector<std::size_t>> introspective_closures(const System& sys, const GlobalState& g) {
  auto edges = watching_graph(sys, g);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t c = 0; c < sys.size(); ++c) {
    std::vector<char> seen(sys.size(), 0);
    std::vector<std::size_t> stack{c};
    seen[c] = 1;
    while (!stack.empty()) {
      std::size_t x = stack.back();
      stack.pop_back();
      for (std::size_t y : edges[x])
        if (!seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
    }
    std::vector<std::size_t> closure;
    for (std::size_t x = 0; x < sys.size(); ++x)
      if (seen[x]) closure.push_back(x);
    out.push_back(std::move(closure));
  }
  return out;
}

bool is_introspective(const System& sys, const GlobalState& g, const std::vector<std::size_t>& subset) {
  auto watch = watch_sets(sys, g);
  std::vector<char> in(sys.size(), 0);
  for (std::size_t c : subset) in[c] = 1;
  for (std::size_t c : subset)
    for (std::size_t i : watch[c]) {
      const auto& p = sys.diagram().peer[c][i];
      if (p && !in[p->component]) return false;
    }
  return true;
}

bool subsystem_deadlocked(const System& sys, const GlobalState& g, const std::vector<std::size_t>& subset,
                          Mode mode) {
  return !has_successor(sys, g, mode, mask_of(sys, subset));
}

std::vector<std::size_t> minimal_introspective_subsystem(const System& sys, const GlobalState& g, Mode mode) {
  check_mode(sys, mode);
  auto closures = introspective_closures(sys, g);
  std::optional<std::vector<std::size_t>> best;
  for (auto& c : closures) {
    if (subsystem_deadlocked(sys, g, c, mode)) continue;
    if (!best || c.size() < best->size() || (c.size() == best->size() && c < *best)) best = c;
  }
  if (!best) throw InputError("state " + sys.render_state(g) + " is a global deadlock");
  return *best;
}

// ---------------------------------------------------------------------------

bool is_deadlock(const Automaton& a, StateId v) {
  for (MotionId m : a.out(v))
    if (!a.is_reflexive(m)) return false;
  return true;
}

namespace {

// BFS order of the states reachable from `from`.
std::vector<StateId> bfs_order(const Automaton& a, StateId from) {
  std::vector<char> seen(a.num_states(), 0);
  std::vector<StateId> order{from};
  seen[from] = 1;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (MotionId m : a.out(order[i]))
      if (!seen[a.target(m)]) {
        seen[a.target(m)] = 1;
        order.push_back(a.target(m));
      }
  return order;
}

}  // namespace

ProductAnalysis product_deadlock_analysis(const Automaton& s, const Automaton& t, Strength strength) {
  if (!s.initial() || !t.initial()) throw InputError("product analysis needs initial states on both operands");
  const auto t0 = Clock::now();
  ProductAnalysis out;
  auto& r = out.report;
  r.algorithm = "product-analysis";
  r.system = "(" + s.name() + " * " + t.name() + ")";
  r.mode = strength == Strength::kWeak ? "weak" : "strong";
  r.component_names = {s.name(), t.name()};

  const StateId w0 = *t.initial();
  auto s_order = bfs_order(s, *s.initial());
  std::vector<StateId> s_dead;
  for (StateId v : s_order) {
    out.explored.emplace_back(v, w0);
    if (is_deadlock(s, v)) s_dead.push_back(v);
  }
  if (strength == Strength::kWeak && s_dead.size() > 1) s_dead.resize(1);
  if (!s_dead.empty()) {
    auto t_order = bfs_order(t, w0);
    std::vector<StateId> t_dead;
    for (StateId w : t_order)
      if (is_deadlock(t, w)) t_dead.push_back(w);
    for (StateId v : s_dead) {
      for (StateId w : t_order)
        if (w != w0) out.explored.emplace_back(v, w);
      for (StateId w : t_dead) {
        r.deadlocks.push_back({v, w});
        r.deadlock_names.push_back({s.state_name(v), t.state_name(w)});
      }
    }
  }
  r.explored = out.explored.size();
  r.elapsed_ms = ms_since(t0);
  return out;
}

}  // namespace awb
