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

// Global states reachable through the lazy successor relation.
std::set<GlobalState> lazy_reach(const System& sys, Mode mode) {
  std::set<GlobalState> seen{sys.initial()};
  std::deque<GlobalState> q{sys.initial()};
  while (!q.empty()) {
    auto g = q.front();
    q.pop_front();
    for (const auto& s : successors(sys, g, mode))
      if (seen.insert(s.target).second) q.push_back(s.target);
  }
  return seen;
}

GlobalState state_of(const System& sys, const std::vector<std::string>& names) {
  GlobalState g;
  for (std::size_t c = 0; c < names.size(); ++c) g.push_back(*sys.automaton(c).find_state(names[c]));
  return g;
}

}  // namespace

TEST_CASE("flatten: ring of three philosophers") {
  const auto d = flatten(models::philosophers_design(3));
  CHECK(d.components.size() == 6);
  CHECK(d.wires.size() == 6);
  CHECK(d.open_ports.empty());
  std::vector<std::string> names;
  for (const auto& c : d.components) names.push_back(c.name);
  CHECK(names == std::vector<std::string>{"p1", "f1", "p2", "f2", "p3", "f3"});
  // Each philosopher's right boundary meets its fork's left one; forks meet the next philosopher.
  for (std::size_t c = 0; c < 6; ++c) {
    const auto peer = d.peer[c][1];
    REQUIRE(peer);
    CHECK(peer->component == (c + 1) % 6);
    CHECK(peer->boundary == 0);
  }
}

TEST_CASE("flatten: single variable and scheduler") {
  const auto one = flatten(Design::var("p", models::philosopher()));
  CHECK(one.components.size() == 1);
  CHECK(one.wires.empty());
  CHECK(one.open_ports.size() == 2);

  const auto sd = flatten(models::scheduler_design(3));
  CHECK(sd.components.size() == 7);
  CHECK(sd.open_ports.size() == 1);
  CHECK(sd.components[sd.open_ports[0].component].name == "m");
  CHECK(sd.open_ports[0].boundary == 1);
  // master-notifier-...-master go ring plus one control wire per notifier
  CHECK(sd.wires.size() == 4 + 3);
  const auto closed = flatten(models::scheduler(3).design());
  CHECK(closed.components.size() == 8);
  CHECK(closed.open_ports.empty());
}

TEST_CASE("flatten is invariant under reassociation") {
  auto v = [](const char* n) { return Design::var(n, models::philosopher()); };
  const auto left = Design::bind(Design::bind(v("a"), v("b")), v("c"));
  const auto right = Design::bind(v("a"), Design::bind(v("b"), v("c")));
  const auto dl = flatten(left), dr = flatten(right);
  CHECK(dl.wires == dr.wires);
  CHECK(dl.open_ports == dr.open_ports);
  CHECK(dl.components.size() == dr.components.size());
  const auto pl = flatten(Design::product(Design::product(v("a"), v("b")), v("c")));
  const auto pr = flatten(Design::product(v("a"), Design::product(v("b"), v("c"))));
  CHECK(pl.open_ports == pr.open_ports);
}

TEST_CASE("design type errors name the offending node") {
  const auto p = Design::var("p", models::philosopher());
  const auto c = Design::var("c", models::process());
  try {
    (void)Design::bind(p, c, 1, 0);
    FAIL("expected a type error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("p:P") != std::string::npos);
  }
}

TEST_CASE("evaluate: ring sizes and a single variable") {
  const auto sys = models::philosophers(3);
  const auto a = evaluate(sys);
  CHECK(a.num_states() == 1728);
  CHECK(a.arity() == 0);
  CHECK(reachable(a).num_states() == 26);
  const System single("single", Design::var("p", models::philosopher()));
  const auto e = evaluate(single);
  CHECK(oracle::sorted_edges(oracle::table(e)) == oracle::sorted_edges(oracle::table(models::philosopher())));
  CHECK(reachable(evaluate(models::token_ring(3))).num_states() == 4);
}

TEST_CASE("successors of the ring") {
  const auto sys = models::philosophers(3);
  const auto init = successors(sys, sys.initial(), Mode::kAtomic);
  CHECK(init.size() == 3);
  for (const auto& s : init) {
    int moved = 0;
    for (std::size_t c = 0; c < 6; ++c) moved += s.target[c] != sys.initial()[c];
    CHECK(moved == 2);
  }
  const auto dead = state_of(sys, {"1", "r", "1", "r", "1", "r"});
  CHECK(successors(sys, dead, Mode::kAll).empty());
  CHECK(successors(sys, dead, Mode::kAtomic).empty());
}

TEST_CASE("successors of bind(P,Q) at (0,u) include the truly concurrent motion") {
  const System sys("pq", Design::bind(Design::var("p", models::philosopher()), Design::var("f", models::fork())));
  const auto succ = successors(sys, sys.initial(), Mode::kAll);
  CHECK(succ.size() == 3);
  bool concurrent = false;
  for (const auto& s : succ)
    if (s.target == state_of(sys, {"1", "r"})) {
      const auto labels = open_labels(sys, s.motion);
      concurrent = labels == std::vector<ActionId>{1, 1};
    }
  CHECK(concurrent);
  CHECK_THROWS_AS(successors(sys, sys.initial(), Mode::kAtomic), InputError);
}

TEST_CASE("atomic successors: single moves and pairs across one wire") {
  const auto sys = models::philosophers(4);
  for (const auto& g : lazy_reach(sys, Mode::kAll)) {
    const auto all = successors(sys, g, Mode::kAll);
    std::set<std::vector<MotionId>> expect;
    for (const auto& s : all) {
      std::vector<std::size_t> moving;
      for (std::size_t c = 0; c < sys.size(); ++c)
        if (!sys.automaton(c).is_reflexive(s.motion[c])) moving.push_back(c);
      bool atomic = moving.size() == 1;
      if (moving.size() == 2) {
        // adjacent across a single wire with a nontrivial shared action
        const auto& peer = sys.diagram().peer;
        for (std::size_t b = 0; b < 2; ++b) {
          auto p = peer[moving[0]][b];
          if (p && p->component == moving[1] &&
              sys.automaton(moving[0]).label(s.motion[moving[0]], b) != kTau)
            atomic = true;
        }
      }
      if (atomic) expect.insert(s.motion);
    }
    std::set<std::vector<MotionId>> got;
    for (const auto& s : successors(sys, g, Mode::kAtomic)) got.insert(s.motion);
    CHECK(got == expect);
  }
}

TEST_CASE("project_local") {
  const auto sys = models::philosophers(3);
  const auto g = sys.initial();
  CHECK(project_local(sys, g, {0, 1, 2, 3, 4, 5}) == g);
  const auto& p = sys.automaton(0);
  const auto& f = sys.automaton(1);
  CHECK(project_local(sys, g, {0, 1}) == std::vector<StateId>{*p.find_state("0"), *f.find_state("u")});
  // P1 locks its left fork, which is f3 (the ring closes f3 onto p1).
  GlobalState after;
  for (const auto& s : successors(sys, g, Mode::kAtomic))
    if (s.target[0] != g[0]) after = s.target;
  REQUIRE(!after.empty());
  CHECK(project_local(sys, after, {0, 1, 2}) ==
        std::vector<StateId>{*p.find_state("1"), *f.find_state("u"), *p.find_state("0")});
  CHECK_THROWS_AS(project_local(sys, g, {}), InputError);
}

TEST_CASE("lazy exploration matches the evaluated automaton on the zoo") {
  for (const auto& inst : models::zoo()) {
    const auto& sys = inst.system;
    const auto lazy = lazy_reach(sys, Mode::kAll);
    const auto a = evaluate(sys);
    std::set<GlobalState> eager;
    for (StateId v : reachable_states(a, *a.initial())) eager.insert(a.leaf_states(v));
    CHECK_MESSAGE(lazy == eager, sys.name());
  }
}

TEST_CASE("atomic exploration reaches the same states and deadlocks") {
  std::vector<System> systems;
  for (int n = 2; n <= 4; ++n) systems.push_back(models::philosophers(n));
  systems.push_back(models::scheduler(2));
  for (const auto& sys : systems) {
    const auto all = lazy_reach(sys, Mode::kAll);
    CHECK_MESSAGE(lazy_reach(sys, Mode::kAtomic) == all, sys.name());
    CheckOptions a, b;
    b.mode = Mode::kAtomic;
    CHECK(bfs_deadlocks(sys, a).deadlocks == bfs_deadlocks(sys, b).deadlocks);
  }
}

TEST_CASE("system validation") {
  const auto d = models::philosophers_design(2);
  CHECK_THROWS_AS(System("x", d, {{"p1", models::process()}}), InputError);
  CHECK_THROWS_AS(System("x", d, {{"p1", models::philosopher().with_initial(std::nullopt)}}), InputError);
  CHECK_THROWS_AS(models::philosophers(1), InputError);
  CHECK_THROWS_AS(models::scheduler(0), InputError);
  CHECK_THROWS_AS(models::message_actions({}), InputError);
}
