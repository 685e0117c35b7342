#include <random>

#include "awb/algebra.hpp"
#include "awb/core.hpp"
#include "awb/error.hpp"
#include "awb/models.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace awb;

namespace {

const std::string T{kTauName};

Behaviour path_by_names(const Automaton& a, const std::vector<std::string>& states) {
  Behaviour b{*a.find_state(states.front()), {}};
  for (std::size_t i = 1; i < states.size(); ++i) {
    const StateId from = *a.find_state(states[i - 1]), to = *a.find_state(states[i]);
    for (MotionId m : a.out(from))
      if (a.target(m) == to && !a.is_reflexive(m)) {
        b.steps.push_back(m);
        break;
      }
  }
  REQUIRE(b.steps.size() + 1 == states.size());
  return b;
}

std::vector<std::string> names(const ActionSet& x, const std::vector<ActionId>& v) {
  std::vector<std::string> out;
  for (auto a : v) out.push_back(x.action_name(a));
  return out;
}

}  // namespace

TEST_CASE("validate: the philosopher is well formed") {
  CHECK(validate(models::philosopher()).empty());
  CHECK(validate(models::fork()).empty());
}

TEST_CASE("validate: nontrivial reflexive label and arity breach are reported") {
  const auto l = models::lock_actions();
  RawAutomaton raw;
  raw.name = "bad";
  raw.signature = {{l, l}, 1};
  raw.states = {"a", "b"};
  raw.motions = {{0, 0, {1, 0}, true, ""}, {1, 1, {0, 0}, true, ""}, {0, 1, {1}, false, ""}};
  raw.reflexive_of = {0, 1};
  const auto v = validate(raw);
  REQUIRE(v.size() == 2);
  CHECK(v[0].motion == MotionId{0});
  CHECK(v[1].motion == MotionId{2});
  CHECK_THROWS_AS(build_automaton(raw), InputError);
}

TEST_CASE("appearance and reduced appearance of the philosopher cycle") {
  const auto p = models::philosopher();
  const auto l = models::lock_actions();
  const auto b = path_by_names(p, {"0", "1", "2", "3", "0"});
  CHECK(names(l, appearance(p, b, 0)) == std::vector<std::string>{"lock", T, "unlock", T});
  CHECK(names(l, reduced_appearance(p, b, 0)) == std::vector<std::string>{"lock", "unlock"});
  CHECK(names(l, reduced_appearance(p, b, 1)) == std::vector<std::string>{"lock", "unlock"});
  CHECK(appearance(p, Behaviour{0, {}}, 0).empty());
  const Behaviour idle{2, {p.reflexive_of(2), p.reflexive_of(2)}};
  CHECK(reduced_appearance(p, idle, 1).empty());
  CHECK_THROWS_AS(appearance(p, b, 2), InputError);
  CHECK_THROWS_AS(appearance(p, Behaviour{1, {b.steps[0]}}, 0), InputError);
}

TEST_CASE("appearance of the fork behaviour u -> l -> u") {
  const auto q = models::fork();
  const auto l = models::lock_actions();
  const auto b = path_by_names(q, {"u", "l", "u"});
  CHECK(names(l, appearance(q, b, 1)) == std::vector<std::string>{T, T});
  CHECK(names(l, reduced_appearance(q, b, 0)) == std::vector<std::string>{"lock", "unlock"});
}

TEST_CASE("reduced appearance is the subsequence of nontrivial actions") {
  std::mt19937 rng(7);
  const auto l = models::lock_actions();
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_automaton(rng, "A", {{l, l}, 1});
    for (StateId v = 0; v < a.num_states(); ++v)
      for (const auto& steps : oracle::behaviours(a, v, 3)) {
        const Behaviour b{v, steps};
        for (std::size_t i = 0; i < 2; ++i) {
          const auto full = appearance(a, b, i);
          const auto red = reduced_appearance(a, b, i);
          std::vector<ActionId> expect;
          for (auto x : full)
            if (x != kTau) expect.push_back(x);
          CHECK(red == expect);
          const bool all_nontrivial = std::none_of(full.begin(), full.end(), [](ActionId x) { return x == kTau; });
          CHECK((red == full) == all_nontrivial);
        }
      }
  }
}

TEST_CASE("reachable keeps names and is idempotent") {
  std::mt19937 rng(11);
  const auto l = models::lock_actions();
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_automaton(rng, "A", {{l}, std::nullopt}, 5, 7);
    const auto tab = oracle::table(a);
    for (StateId v = 0; v < a.num_states(); ++v) {
      const auto r = reachable(a, v);
      const auto expect = oracle::reach(tab, v);
      REQUIRE(r.num_states() == expect.size());
      std::set<std::string> got, want;
      for (StateId w = 0; w < r.num_states(); ++w) got.insert(r.state_name(w));
      for (auto w : expect) want.insert(a.state_name(w));
      CHECK(got == want);
      CHECK(r.state_name(*r.initial()) == a.state_name(v));
      const auto rr = reachable(r, *r.initial());
      CHECK(oracle::sorted_edges(oracle::table(rr)) == oracle::sorted_edges(oracle::table(r)));
      for (StateId w = 0; w < r.num_states(); ++w) CHECK(rr.state_name(w) == r.state_name(w));
    }
  }
}

TEST_CASE("reachable: single state and unknown state") {
  const auto u = unit_automaton();
  CHECK(reachable(u, 0).num_states() == 1);
  CHECK_THROWS_AS(reachable(u, 3), InputError);
}

TEST_CASE("linearity of components and composites") {
  const auto p = models::philosopher(), q = models::fork();
  CHECK(is_linear(p));
  CHECK(is_linear(q));
  CHECK_FALSE(is_linear(bind(p, q)));
  const auto id = identity_automaton(models::lock_actions());
  CHECK_FALSE(is_linear(id));
  const auto lin = linearize(id);
  CHECK(lin.num_states() == 1);
  CHECK(lin.num_motions() == 1);
  CHECK(linearize(p).same_object(p));
}

TEST_CASE("linearize keeps exactly the linear motions") {
  std::mt19937 rng(5);
  const auto l = models::lock_actions();
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = oracle::random_automaton(rng, "A", {{l, l}, 1}, 4, 8);
    const auto lin = linearize(a);
    std::vector<oracle::Edge> expect;
    for (const auto& e : oracle::table(a).edges)
      if (std::count_if(e.labels.begin(), e.labels.end(), [](ActionId x) { return x != kTau; }) <= 1)
        expect.push_back(e);
    std::sort(expect.begin(), expect.end());
    CHECK(oracle::sorted_edges(oracle::table(lin)) == expect);
    CHECK(linear_motions(a).size() == expect.size());
    CHECK((lin.same_object(a)) == is_linear(a));
  }
}

TEST_CASE("linearized reachable binding of philosopher and fork") {
  const auto l = models::lock_actions();
  // Drawn by hand: the six reachable states and their linear motions.
  const auto fig = AutomatonBuilder("fig", {{l, l}, 1})
                       .states({"0u", "1u", "0r", "1r", "2l", "3l"})
                       .motion("0u", "1u", {"lock", T})
                       .motion("0u", "0r", {T, "lock"})
                       .motion("1u", "2l", {T, T})
                       .motion("1u", "1r", {T, "lock"})
                       .motion("0r", "1r", {"lock", T})
                       .motion("0r", "0u", {T, "unlock"})
                       .motion("1r", "1u", {T, "unlock"})
                       .motion("2l", "3l", {"unlock", T})
                       .motion("3l", "0u", {T, T})
                       .initial("0u")
                       .build();
  const auto pq = bind(models::philosopher(), models::fork());
  CHECK(pq.num_states() == 12);
  const auto lin = linearize(reachable(pq));
  CHECK(lin.num_states() == 6);
  auto iso = isomorphic(lin, fig);
  REQUIRE(iso);
  CHECK(check_isomorphism(lin, fig, *iso));
  CHECK(lin.num_motions() - lin.num_states() == 9);
}

TEST_CASE("linearizability") {
  const auto p = models::philosopher(), q = models::fork();
  const auto res = check_linearizable(bind(p, q));
  CHECK(res.linearizable);
  for (const auto& r : res.refinements) {
    const auto a = bind(p, q);
    CHECK(is_behaviour(a, r.path));
    CHECK(r.path.start == a.source(r.motion));
    CHECK(r.path.end(a) == a.target(r.motion));
    for (MotionId m : r.path.steps) CHECK(a.is_linear(m));
  }
  CHECK(is_linearizable(p));

  const ActionSet x("X", {"a"}), y("Y", {"b"});
  const auto one = AutomatonBuilder("one", {{x, y}, 1}).state("s").motion("s", "s", {"a", "b"}).build();
  const auto r = check_linearizable(one);
  CHECK_FALSE(r.linearizable);
  REQUIRE(r.failure);
  CHECK(r.failure->motion == *one.find_motion("m0"));
}

TEST_CASE("random bindings of linear automata are linearizable") {
  std::mt19937 rng(3);
  const auto l = models::lock_actions();
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto s = linearize(oracle::random_automaton(rng, "S", {{l, l}, 1}, 3, 5));
    auto t = linearize(oracle::random_automaton(rng, "T", {{l, l}, 1}, 3, 5));
    const auto b = bind(s, t);
    const auto res = check_linearizable(b);
    // A nonlinear motion of bind(S,T) pairs two linear motions acting on the
    // outer boundaries; performing them one after the other refines it.
    CHECK(res.linearizable);
    checked += !res.refinements.empty();
  }
  CHECK(checked > 10);
}
