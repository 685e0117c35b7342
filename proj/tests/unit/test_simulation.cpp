#include <random>

#include "awb/algebra.hpp"
#include "awb/checker.hpp"
#include "awb/core.hpp"
#include "awb/error.hpp"
#include "awb/models.hpp"
#include "awb/simulation.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace awb;

namespace {

std::vector<StateId> domain(const Automaton& a) {
  if (!a.initial()) {
    std::vector<StateId> all(a.num_states());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  const auto r = oracle::reach(oracle::table(a), *a.initial());
  return {r.begin(), r.end()};
}

// Every nonreflexive target motion at f(v) is reached by silent source steps
// followed by one step onto it.
std::optional<std::pair<StateId, MotionId>> unliftable(const Comparison& f) {
  const auto& s = f.source;
  const auto& t = f.target;
  for (StateId v : domain(s)) {
    const StateId w = f.state_map[v];
    const MotionId idle = t.reflexive_of(w);
    std::set<StateId> seen{v};
    std::deque<StateId> q{v};
    std::set<MotionId> hit;
    while (!q.empty()) {
      const StateId u = q.front();
      q.pop_front();
      for (MotionId m = 0; m < s.num_motions(); ++m) {
        if (s.source(m) != u) continue;
        if (f.motion_map[m] == idle) {
          if (seen.insert(s.target(m)).second) q.push_back(s.target(m));
        } else {
          hit.insert(f.motion_map[m]);
        }
      }
    }
    for (MotionId e = 0; e < t.num_motions(); ++e)
      if (t.source(e) == w && !t.is_reflexive(e) && !hit.count(e)) return std::pair{v, e};
  }
  return std::nullopt;
}

// Number of comparisons s => t: state maps fixing the initial state, times
// the choices of image for each motion.
std::size_t count_comparisons(const Automaton& s, const Automaton& t) {
  const auto dom = domain(s);
  const auto codom = domain(t);
  std::size_t total = 0;
  std::vector<std::size_t> pick(dom.size(), 0);
  while (true) {
    std::vector<StateId> map(s.num_states(), kNone);
    for (std::size_t i = 0; i < dom.size(); ++i) map[dom[i]] = codom[pick[i]];
    if (!s.initial() || map[*s.initial()] == *t.initial()) {
      std::size_t ways = 1;
      for (MotionId m = 0; m < s.num_motions() && ways; ++m) {
        if (map[s.source(m)] == kNone) continue;
        std::size_t c = 0;
        for (MotionId n = 0; n < t.num_motions(); ++n) {
          if (t.source(n) != map[s.source(m)] || t.target(n) != map[s.target(m)]) continue;
          if (s.is_reflexive(m) && !t.is_reflexive(n)) continue;
          bool same = true;
          for (std::size_t i = 0; i < s.arity(); ++i) same = same && s.label(m, i) == t.label(n, i);
          c += same;
        }
        ways *= c;
      }
      total += ways;
    }
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == codom.size()) pick[i++] = 0;
    if (i == pick.size()) break;
  }
  return total;
}

using Word = std::vector<std::vector<ActionId>>;

// Words of reduced appearances with at most k letters, from the initial state.
std::set<Word> words(const Automaton& a, std::size_t k) {
  std::set<Word> out;
  std::set<std::pair<StateId, Word>> seen;
  std::deque<std::pair<StateId, Word>> q{{*a.initial(), {}}};
  seen.insert(q.front());
  while (!q.empty()) {
    auto [v, w] = q.front();
    q.pop_front();
    out.insert(w);
    for (MotionId m : a.out(v)) {
      auto l = a.labels(m);
      std::vector<ActionId> letter(l.begin(), l.end());
      Word next = w;
      if (std::any_of(letter.begin(), letter.end(), [](ActionId x) { return x != kTau; })) {
        if (w.size() == k) continue;
        next.push_back(letter);
      }
      std::pair<StateId, Word> item{a.target(m), next};
      if (seen.insert(item).second) q.push_back(item);
    }
  }
  return out;
}

std::vector<StateId> deadlocks_of(const Automaton& a) {
  const auto tab = oracle::table(a);
  std::vector<StateId> out;
  for (auto v : oracle::reach(tab, *a.initial()))
    if (oracle::deadlocked(tab, v)) out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("p and q are simulations; r is a comparison but not a simulation") {
  for (const auto& f : {models::p_comparison(), models::q_comparison()}) {
    CHECK(verify_comparison(f).empty());
    CHECK_FALSE(unliftable(f));
    const auto chk = check_simulation(f);
    REQUIRE(chk.ok());
    for (const auto& l : chk.simulation->certificate()) {
      CHECK(is_behaviour(f.source, l.path));
      CHECK(l.path.start == l.state);
      REQUIRE_FALSE(l.path.steps.empty());
      for (std::size_t i = 0; i + 1 < l.path.steps.size(); ++i)
        CHECK(f.target.is_reflexive(f.motion_map[l.path.steps[i]]));
      CHECK(f.motion_map[l.path.steps.back()] == l.target_motion);
    }
  }
  const auto r = models::r_comparison();
  CHECK(verify_comparison(r).empty());
  const auto bad = unliftable(r);
  REQUIRE(bad);
  const auto chk = check_simulation(r);
  CHECK_FALSE(chk.ok());
  REQUIRE(chk.counterexample);
  CHECK_THROWS_AS(verify_simulation(r), InputError);
  CHECK_FALSE(chk.describe(r).empty());
}

TEST_CASE("comparisons between philosopher variants are counted by brute force") {
  const auto p = models::philosopher(), p1 = models::philosopher_nondet(), p2 = models::philosopher_double_cover();
  CHECK(count_comparisons(p2, p) == 1);
  CHECK(count_comparisons(p1, p) == 1);
  CHECK(count_comparisons(p2, p1) == 4);
  CHECK(count_comparisons(p, p1) == 2);  // one per branch
}

TEST_CASE("q agrees with r followed by p on states and motions") {
  const auto p = models::p_comparison(), q = models::q_comparison(), r = models::r_comparison();
  for (StateId v : domain(q.source)) CHECK(q.state_map[v] == p.state_map[r.state_map[v]]);
  for (MotionId m = 0; m < q.source.num_motions(); ++m) CHECK(q.motion_map[m] == p.motion_map[r.motion_map[m]]);
}

TEST_CASE("a motion with no preimage cannot be lifted") {
  const ActionSet x("X", {"a"});
  const auto one = AutomatonBuilder("one", {{x}, std::nullopt}).state("s").initial("s").build();
  const auto two = AutomatonBuilder("two", {{x}, std::nullopt})
                       .states({"t0", "t1"})
                       .motion("t0", "t1", {"a"})
                       .initial("t0")
                       .build();
  const auto f = infer_comparison(one, two, {0});
  CHECK(verify_comparison(f).empty());
  const auto chk = check_simulation(f);
  CHECK_FALSE(chk.ok());
  REQUIRE(chk.counterexample);
  CHECK(chk.counterexample->first == 0);
  CHECK(chk.counterexample->second == *two.find_motion("m0"));
}

TEST_CASE("comparison invariants are enforced") {
  auto f = models::p_comparison();
  f.state_map[*f.source.initial()] = f.state_map[*f.source.initial()] == 0 ? 1 : 0;
  CHECK_FALSE(verify_comparison(f).empty());
  auto g = models::p_comparison();
  for (MotionId m = 0; m < g.source.num_motions(); ++m)
    if (g.source.is_reflexive(m)) {
      g.motion_map[m] = *g.target.find_motion("m0");
      break;
    }
  CHECK_FALSE(verify_comparison(g).empty());
  CHECK_THROWS_AS(infer_comparison(models::philosopher(), models::fork(), {0, 0, 0, 0}), InputError);
}

TEST_CASE("constructions on simulations give simulations") {
  const auto p = verify_simulation(models::p_comparison());
  const auto q = verify_simulation(models::q_comparison());
  const auto id = identity_simulation(models::philosopher());
  for (StateId v = 0; v < 4; ++v) CHECK(id.state(v) == v);
  CHECK_FALSE(unliftable(id.comparison()));

  const auto pq = compose(p, id);
  CHECK(pq.comparison().state_map == p.comparison().state_map);

  std::vector<Simulation> built{bind_sim(p, q, 1, 0), product_sim(p, q), opposite_sim(p),
                                fb_sim(bind_sim(p, q, 1, 0), 0, 1)};
  for (const auto& s : built) {
    CHECK(verify_comparison(s.comparison()).empty());
    CHECK_FALSE(unliftable(s.comparison()));
  }
  const auto& b = built[0];
  CHECK(isomorphic(b.target(), bind(models::philosopher(), models::philosopher(), 1, 0)));
}

TEST_CASE("lifting p to the ring of three and the deadlock preimage") {
  const auto p = verify_simulation(models::p_comparison());
  const auto src = models::philosophers(3, models::Variant::kNondet);
  const auto tgt = models::philosophers(3);
  const auto lifted = lift_simulation(src, tgt, {{"p1", p}, {"p2", p}, {"p3", p}});
  CHECK_FALSE(unliftable(lifted.comparison()));
  const auto target_dead = deadlocks_of(lifted.target());
  CHECK(target_dead.size() == 1);
  const auto pre = preimage_deadlock_check(lifted, target_dead);
  CHECK(pre.deadlocks.size() == 8);
  const auto src_dead = deadlocks_of(lifted.source());
  CHECK(std::set<StateId>(pre.deadlocks.begin(), pre.deadlocks.end()) ==
        std::set<StateId>(src_dead.begin(), src_dead.end()));
  for (StateId v : src_dead)
    CHECK(std::find(target_dead.begin(), target_dead.end(), lifted.state(v)) != target_dead.end());
  CHECK_THROWS_AS(lift_simulation(src, models::philosophers(2), {{"p1", p}}), InputError);
}

TEST_CASE("simulations map deadlocks to deadlocks and keep reduced languages") {
  const auto p = verify_simulation(models::p_comparison());
  const auto q = verify_simulation(models::q_comparison());
  for (int n = 2; n <= 3; ++n)
    for (auto [variant, sim] : {std::pair{models::Variant::kNondet, p}, std::pair{models::Variant::kDoubleCover, q}}) {
      std::map<std::string, Simulation> per;
      for (int i = 1; i <= n; ++i) per.emplace("p" + std::to_string(i), sim);
      const auto lifted = lift_simulation(models::philosophers(n, variant), models::philosophers(n), per);
      const auto target_dead = deadlocks_of(lifted.target());
      for (StateId v : deadlocks_of(lifted.source()))
        CHECK(std::find(target_dead.begin(), target_dead.end(), lifted.state(v)) != target_dead.end());
    }
  for (const auto& f : {p, q}) {
    CHECK(reduced_language_equiv(f.source(), f.target()).equivalent);
    CHECK(words(f.source(), 4) == words(f.target(), 4));
  }
}

TEST_CASE("reduced language check agrees with bounded word sets") {
  std::mt19937 rng(29);
  const auto l = models::lock_actions();
  int differ = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto s = oracle::random_automaton(rng, "S", {{l}, std::nullopt}, 3, 4);
    const auto t = oracle::random_automaton(rng, "T", {{l}, std::nullopt}, 3, 4);
    for (std::size_t k : {1u, 2u, 3u}) {
      const auto r = reduced_language_equiv(s, t, {}, k);
      const bool same = words(s, k) == words(t, k);
      CHECK(r.equivalent == same);
      if (!r.equivalent) {
        CHECK(r.counterexample.size() <= k);
        const auto& side = r.in_left ? words(s, k) : words(t, k);
        const auto& other = r.in_left ? words(t, k) : words(s, k);
        CHECK(side.count(r.counterexample) == 1);
        CHECK(other.count(r.counterexample) == 0);
      }
      differ += !same;
    }
  }
  CHECK(differ > 0);
}

TEST_CASE("channels: designed protocols behave as the message passer") {
  for (int k : {1, 2})
    for (auto kind : {models::ChannelKind::kPerfect, models::ChannelKind::kCapacity1}) {
      const auto names = models::message_names(k);
      const auto sys = models::ack_protocol(kind, names);
      const auto ev = reachable(evaluate(sys));
      const auto mp = models::message_passer(models::message_actions(names));
      CHECK(reduced_language_equiv(ev, mp).equivalent);
      CHECK(words(ev, 4) == words(mp, 4));
    }
}

TEST_CASE("philosopher and fork differ on their reduced languages") {
  const auto r = reduced_language_equiv(models::philosopher(), models::fork());
  CHECK_FALSE(r.equivalent);
  CHECK_FALSE(r.in_left);
  const auto l = models::lock_actions();
  REQUIRE(r.counterexample.size() == 1);
  CHECK(r.counterexample[0] == std::vector<ActionId>{kTau, *l.find("lock")});
  CHECK(reduced_language_equiv(models::philosopher(), models::fork(), {0}).equivalent);
}

TEST_CASE("scheduler simulations") {
  for (const auto& f : {models::notifier_process_to_token(), models::master_process_to_token()}) {
    CHECK(verify_comparison(f).empty());
    CHECK_FALSE(unliftable(f));
    CHECK(check_simulation(f).ok());
  }
  for (int n = 1; n <= 3; ++n) {
    const auto sim = models::scheduler_to_token_ring(n);
    CHECK_FALSE(unliftable(sim.comparison()));
    CHECK(reachable(sim.target()).num_states() == static_cast<std::size_t>(n + 1));
    // the grouped scheduler has the same evaluation as the plain one
    CHECK(reachable(evaluate(models::scheduler_grouped(n))).num_states() ==
          reachable(evaluate(models::scheduler(n))).num_states());
  }
}

TEST_CASE("q~ preimage of the ring deadlock consists of deadlocks only") {
  const auto q = verify_simulation(models::q_comparison());
  for (int n = 2; n <= 3; ++n) {
    std::map<std::string, Simulation> per;
    for (int i = 1; i <= n; ++i) per.emplace("p" + std::to_string(i), q);
    const auto src = models::philosophers(n, models::Variant::kDoubleCover);
    const auto lifted = lift_simulation(src, models::philosophers(n), per);
    const auto pre = preimage_deadlock_check(lifted, deadlocks_of(lifted.target()));
    CHECK(pre.deadlocks == pre.preimage);
    CHECK(pre.deadlocks.size() == (std::size_t{1} << n));
    for (StateId v : pre.preimage) CHECK_FALSE(has_successor(src, lifted.source().leaf_states(v), Mode::kAll));
  }
}

TEST_CASE("protocol reachable parts have the drawn shapes") {
  const ActionSet m = models::message_actions(models::message_names(1));
  const std::string T{kTauName};
  // a -> b sends, d -> e delivers; the rest is internal.
  auto cycle = [&](bool lossy) {
    AutomatonBuilder b("drawn", {{m, m}, 1});
    b.states({"a", "b", "c", "d", "e", "f"})
        .motion("a", "b", {"m", T})
        .motion("b", "c", {T, T})
        .motion("c", "d", {T, T})
        .motion("d", "e", {T, "m"})
        .motion("e", "f", {T, T})
        .motion("f", "a", {T, T});
    if (lossy) b.state("x").motion("b", "x", {T, T}).motion("e", "x", {T, T});
    return b.initial("a").build();
  };
  const auto cap = reachable(evaluate(models::ack_protocol(models::ChannelKind::kCapacity1, {"m"})));
  CHECK(isomorphic(cap, cycle(false)));
  const auto lossy = reachable(evaluate(models::ack_protocol(models::ChannelKind::kLossy, {"m"})));
  CHECK(isomorphic(lossy, cycle(true)));
}
