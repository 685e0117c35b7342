#include <random>

#include "awb/algebra.hpp"
#include "awb/checker.hpp"
#include "awb/core.hpp"
#include "awb/error.hpp"
#include "awb/models.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace awb;

namespace {

// Deadlocks of the evaluated automaton, as leaf-state tuples.
std::set<GlobalState> eager_deadlocks(const System& sys) {
  const auto a = evaluate(sys);
  const auto tab = oracle::table(a);
  std::set<GlobalState> out;
  for (auto v : oracle::reach(tab, *a.initial()))
    if (oracle::deadlocked(tab, v)) out.insert(a.leaf_states(v));
  return out;
}

std::set<GlobalState> as_set(const DeadlockReport& r) { return {r.deadlocks.begin(), r.deadlocks.end()}; }

// Closed ring of automata with signature (L ; L).
System random_ring(std::mt19937& rng, std::size_t n) {
  const auto l = models::lock_actions();
  Design d;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = linearize(oracle::random_automaton(rng, "A" + std::to_string(i), {{l, l}, 1}, 3, 6));
    auto v = Design::var("a" + std::to_string(i), a);
    d = d.valid() ? Design::bind(d, v) : v;
  }
  return System("ring", Design::feedback(d, 0, 1));
}

// Independent watch relation: c depends on the peer of each boundary it may act on.
std::vector<std::set<std::size_t>> watch_edges(const System& sys, const GlobalState& g) {
  std::vector<std::set<std::size_t>> e(sys.size());
  for (std::size_t c = 0; c < sys.size(); ++c) {
    const auto tab = oracle::table(sys.automaton(c));
    for (const auto& m : tab.edges)
      if (m.src == g[c])
        for (std::size_t b = 0; b < m.labels.size(); ++b)
          if (m.labels[b] != kTau)
            if (auto p = sys.diagram().peer[c][b]; p && p->component != c) e[c].insert(p->component);
  }
  return e;
}

// Subsets closed under watching that can move on their own, by brute force
// over the evaluated automaton's global motions.
std::vector<std::vector<std::size_t>> live_introspective_subsets(const System& sys, const Automaton& ev, StateId v) {
  const auto g = ev.leaf_states(v);
  const auto e = watch_edges(sys, g);
  std::vector<std::vector<std::size_t>> out;
  const std::size_t n = sys.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool closed = true;
    for (std::size_t c = 0; c < n && closed; ++c)
      if (mask >> c & 1)
        for (auto d : e[c]) closed = closed && (mask >> d & 1);
    if (!closed) continue;
    bool live = false;
    for (MotionId m : ev.out(v)) {
      if (ev.is_reflexive(m)) continue;
      const auto lm = ev.leaf_motions(m);
      bool inside = true;
      for (std::size_t c = 0; c < n; ++c)
        if (!(mask >> c & 1) && !sys.automaton(c).is_reflexive(lm[c])) inside = false;
      live = live || inside;
    }
    if (!live) continue;
    std::vector<std::size_t> s;
    for (std::size_t c = 0; c < n; ++c)
      if (mask >> c & 1) s.push_back(c);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("bfs on the three-philosopher ring") {
  const auto r = bfs_deadlocks(models::philosophers(3));
  CHECK(r.algorithm == "bfs");
  CHECK(r.reachable == std::optional<std::size_t>(26));
  REQUIRE(r.deadlocks.size() == 1);
  CHECK(r.deadlock_names[0] == std::vector<std::string>{"1", "r", "1", "r", "1", "r"});
  CHECK(r.complete);
}

TEST_CASE("bfs agrees with the evaluated automaton on the zoo") {
  for (const auto& inst : models::zoo()) {
    const auto r = bfs_deadlocks(inst.system);
    CHECK_MESSAGE(as_set(r) == eager_deadlocks(inst.system), inst.system.name());
    CHECK(*r.reachable == reachable(evaluate(inst.system)).num_states());
  }
}

TEST_CASE("bfs witnesses replay to the deadlock") {
  CheckOptions opt;
  opt.witnesses = true;
  const auto sys = models::philosophers(4, models::Variant::kNondet);
  const auto r = bfs_deadlocks(sys, opt);
  REQUIRE(r.witnesses);
  REQUIRE(r.witnesses->size() == r.deadlocks.size());
  for (std::size_t d = 0; d < r.deadlocks.size(); ++d) {
    auto g = sys.initial();
    for (const auto& step : (*r.witnesses)[d]) {
      bool found = false;
      for (const auto& s : successors(sys, g, Mode::kAll))
        if (s.motion == step) {
          g = s.target;
          found = true;
        }
      REQUIRE(found);
    }
    CHECK(g == r.deadlocks[d]);
  }
}

TEST_CASE("token ring and lossy channel") {
  const auto tok = bfs_deadlocks(models::token_ring(4));
  CHECK(tok.deadlocks.empty());
  CHECK(*tok.reachable == 5);
  const auto lossy = bfs_deadlocks(models::ack_protocol(models::ChannelKind::kLossy, models::message_names(1)));
  CHECK(lossy.deadlocks.size() >= 1);
  CHECK(*lossy.reachable == 7);
}

TEST_CASE("state budget raises with a partial report") {
  CheckOptions opt;
  opt.max_states = 10;
  try {
    (void)bfs_deadlocks(models::scheduler(3), opt);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK_FALSE(e.partial().complete);
    CHECK(e.partial().explored >= 10);
  }
  CHECK_THROWS_AS(misa_deadlocks(models::philosophers(6), opt), ResourceError);
}

TEST_CASE("a system deadlocked at its initial state") {
  const auto p = models::philosopher(), q = models::fork();
  const auto p1 = p.with_initial(p.find_state("1"));
  const auto qr = q.with_initial(q.find_state("r"));
  const System sys("stuck", models::philosophers_design(2), {{"p1", p1}, {"p2", p1}, {"f1", qr}, {"f2", qr}});
  for (auto mode : {Mode::kAll, Mode::kAtomic}) {
    CheckOptions opt;
    opt.mode = mode;
    const auto b = bfs_deadlocks(sys, opt);
    CHECK(b.explored == 1);
    CHECK(b.deadlocks.size() == 1);
    const auto m = misa_deadlocks(sys, opt);
    CHECK(m.explored == 1);
    CHECK(as_set(m) == as_set(b));
  }
}

TEST_CASE("product analysis") {
  const ActionSet x("X", {"a"});
  const auto chain = AutomatonBuilder("C", {{x}, std::nullopt})
                         .states({"0", "d"})
                         .motion("0", "d", {"a"})
                         .initial("0")
                         .build();
  const auto weak = product_deadlock_analysis(chain, chain, Strength::kWeak);
  CHECK(weak.report.explored <= 4);
  REQUIRE(weak.report.deadlock_names.size() == 1);
  CHECK(weak.report.deadlock_names[0] == std::vector<std::string>{"d", "d"});

  const auto p = models::philosopher();
  const auto pp = product_deadlock_analysis(p, p, Strength::kStrong);
  CHECK(pp.report.deadlocks.empty());
  CHECK(pp.report.explored <= 8);

  // Against the evaluated product.
  std::mt19937 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const auto s = oracle::random_automaton(rng, "S", {{x}, std::nullopt}, 4, 4);
    const auto t = oracle::random_automaton(rng, "T", {{x}, std::nullopt}, 4, 4);
    const auto prod = product(s, t);
    const auto tab = oracle::table(prod);
    std::set<GlobalState> expect;
    for (auto v : oracle::reach(tab, *prod.initial()))
      if (oracle::deadlocked(tab, v)) expect.insert(prod.leaf_states(v));
    const auto strong = product_deadlock_analysis(s, t, Strength::kStrong);
    CHECK(as_set(strong.report) == expect);
    const auto w = product_deadlock_analysis(s, t, Strength::kWeak);
    CHECK(w.report.deadlocks.empty() == expect.empty());
    for (const auto& d : w.report.deadlocks) CHECK(expect.count(d) == 1);
  }
}

TEST_CASE("watch sets of the philosopher and the fork") {
  const auto sys = models::philosophers(2);
  const auto w = watch_sets(sys, sys.initial());
  CHECK(w[0] == std::vector<std::size_t>{0});
  CHECK(w[1] == std::vector<std::size_t>{0, 1});
  GlobalState g = sys.initial();
  g[0] = *sys.automaton(0).find_state("1");
  CHECK(watch_sets(sys, g)[0] == std::vector<std::size_t>{1});
  g[0] = *sys.automaton(0).find_state("2");
  CHECK(watch_sets(sys, g)[0] == std::vector<std::size_t>{0});
}

TEST_CASE("minimal introspective subsystems on the ring") {
  const auto sys = models::philosophers(3);
  const auto& p = sys.automaton(0);
  const auto& f = sys.automaton(1);
  CHECK(minimal_introspective_subsystem(sys, sys.initial()) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  // p1 holds f3 and waits for f1.
  GlobalState g = sys.initial();
  g[0] = *p.find_state("1");
  g[5] = *f.find_state("r");
  CHECK(minimal_introspective_subsystem(sys, g) == std::vector<std::size_t>{0, 1, 2});
  // p1 has eaten and is about to release f3.
  g[0] = *p.find_state("2");
  g[1] = *f.find_state("l");
  CHECK(minimal_introspective_subsystem(sys, g) == std::vector<std::size_t>{0, 5});
  const GlobalState dead{*p.find_state("1"), *f.find_state("r"), *p.find_state("1"),
                         *f.find_state("r"), *p.find_state("1"), *f.find_state("r")};
  CHECK_THROWS_AS(minimal_introspective_subsystem(sys, dead), InputError);
}

TEST_CASE("minimal introspective subsystem matches a brute-force search") {
  for (int n = 2; n <= 3; ++n)
    for (auto variant : {models::Variant::kStandard, models::Variant::kNondet}) {
      const auto sys = models::philosophers(n, variant);
      const auto ev = evaluate(sys);
      for (StateId v : reachable_states(ev, *ev.initial())) {
        const auto g = ev.leaf_states(v);
        const auto live = live_introspective_subsets(sys, ev, v);
        if (live.empty()) {
          CHECK_THROWS_AS(minimal_introspective_subsystem(sys, g), InputError);
          continue;
        }
        const auto mis = minimal_introspective_subsystem(sys, g);
        CHECK(std::find(live.begin(), live.end(), mis) != live.end());
        for (const auto& s : live) CHECK(s.size() >= mis.size());
      }
    }
}

TEST_CASE("global deadlock iff no introspective closure can move, on random rings") {
  std::mt19937 rng(23);
  int deadlocks = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto sys = random_ring(rng, 2 + trial % 3);
    const auto ev = evaluate(sys);
    const auto tab = oracle::table(ev);
    for (auto v : oracle::reach(tab, *ev.initial())) {
      const auto g = ev.leaf_states(v);
      bool any_live = false;
      for (const auto& c : introspective_closures(sys, g))
        any_live = any_live || !subsystem_deadlocked(sys, g, c, Mode::kAll);
      CHECK(oracle::deadlocked(tab, v) == !any_live);
      deadlocks += oracle::deadlocked(tab, v);
    }
    CHECK(as_set(misa_deadlocks(sys)) == as_set(bfs_deadlocks(sys)));
  }
  CHECK(deadlocks > 0);
}

TEST_CASE("misa explores 3n^2-3n+2 states on the standard ring") {
  for (std::size_t n = 2; n <= 6; ++n) {
    CheckOptions opt;
    opt.mode = Mode::kAtomic;
    const auto r = misa_deadlocks(models::philosophers(n), opt);
    CHECK(r.explored == 3 * n * n - 3 * n + 2);
    CHECK(r.deadlocks.size() == 1);
    CHECK_FALSE(r.reachable);
  }
}

TEST_CASE("misa finds the same deadlocks as bfs on the zoo") {
  for (const auto& inst : models::zoo()) {
    const auto b = bfs_deadlocks(inst.system);
    for (auto order : {Order::kFifo, Order::kLifo}) {
      CheckOptions opt;
      opt.order = order;
      CHECK_MESSAGE(as_set(misa_deadlocks(inst.system, opt)) == as_set(b), inst.system.name());
    }
  }
}

TEST_CASE("misa is deterministic across thread counts") {
  const auto sys = models::philosophers(5, models::Variant::kNondet);
  CheckOptions opt;
  opt.mode = Mode::kAtomic;
  opt.witnesses = true;
  const auto one = misa_deadlocks(sys, opt);
  for (unsigned t : {2u, 4u}) {
    opt.threads = t;
    const auto r = misa_deadlocks(sys, opt);
    CHECK(r.explored == one.explored);
    CHECK(r.deadlocks == one.deadlocks);
    CHECK(r.witness_names == one.witness_names);
  }
}
