#include "awb/models.hpp"

#include <cmath>

#include "awb/algebra.hpp"
#include "awb/checker.hpp"
#include "awb/core.hpp"
#include "awb/error.hpp"

namespace awb::models {

namespace {

const std::string T{kTauName};

BoundarySignature two_sided(const ActionSet& left, const ActionSet& right) {
  return BoundarySignature{{left, right}, 1};
}

std::string expect_eq(const std::string& what, std::size_t got, std::size_t want) {
  if (got == want) return {};
  return what + ": got " + std::to_string(got) + ", expected " + std::to_string(want);
}

std::size_t pow_int(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Philosophers

ActionSet lock_actions() {
  static const ActionSet l("L", {"lock", "unlock"});
  return l;
}

Automaton philosopher() {
  static const Automaton a = [] {
    const auto l = lock_actions();
    return AutomatonBuilder("P", two_sided(l, l))
        .states({"0", "1", "2", "3"})
        .motion("0", "1", {"lock", T})
        .motion("1", "2", {T, "lock"})
        .motion("2", "3", {"unlock", T})
        .motion("3", "0", {T, "unlock"})
        .initial("0")
        .build();
  }();
  return a;
}

Automaton fork() {
  static const Automaton a = [] {
    const auto l = lock_actions();
    return AutomatonBuilder("Q", two_sided(l, l))
        .states({"u", "l", "r"})
        .motion("u", "l", {"lock", T})
        .motion("l", "u", {"unlock", T})
        .motion("u", "r", {T, "lock"})
        .motion("r", "u", {T, "unlock"})
        .initial("u")
        .build();
  }();
  return a;
}

Automaton philosopher_nondet() {
  static const Automaton a = [] {
    const auto l = lock_actions();
    return AutomatonBuilder("Pprime", two_sided(l, l))
        .states({"0", "1", "2", "3", "1'", "2'", "3'"})
        .motion("0", "1", {"lock", T})
        .motion("1", "2", {T, "lock"})
        .motion("2", "3", {"unlock", T})
        .motion("3", "0", {T, "unlock"})
        .motion("0", "1'", {"lock", T})
        .motion("1'", "2'", {T, "lock"})
        .motion("2'", "3'", {"unlock", T})
        .motion("3'", "0", {T, "unlock"})
        .initial("0")
        .build();
  }();
  return a;
}

Automaton philosopher_double_cover() {
  static const Automaton a = [] {
    const auto l = lock_actions();
    AutomatonBuilder b("Pdprime", two_sided(l, l));
    for (int i = 0; i < 8; ++i) b.state(std::to_string(i));
    const std::vector<std::vector<std::string>> labels = {
        {"lock", T}, {T, "lock"}, {"unlock", T}, {T, "unlock"}};
    for (int i = 0; i < 8; ++i) b.motion(std::to_string(i), std::to_string((i + 1) % 8), labels[i % 4]);
    return b.initial("0").build();
  }();
  return a;
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::kStandard: return "standard";
    case Variant::kNondet: return "nondet";
    case Variant::kDoubleCover: return "double-cover";
  }
  return "?";
}

Automaton philosopher(Variant v) {
  switch (v) {
    case Variant::kStandard: return philosopher();
    case Variant::kNondet: return philosopher_nondet();
    case Variant::kDoubleCover: return philosopher_double_cover();
  }
  return philosopher();
}

Design philosophers_design(int n, Variant v) {
  if (n < 2) throw InputError("philosophers: ring size must be at least 2, got " + std::to_string(n));
  Design chain;
  for (int i = 1; i <= n; ++i) {
    auto pair = Design::bind(Design::var("p" + std::to_string(i), philosopher(v)),
                             Design::var("f" + std::to_string(i), fork()));
    chain = chain.valid() ? Design::bind(chain, pair) : pair;
  }
  return Design::feedback(chain, 0, 1);
}

System philosophers(int n, Variant v) {
  std::string name = "phil" + std::to_string(n);
  if (v == Variant::kNondet) name += "_nondet";
  if (v == Variant::kDoubleCover) name += "_dcover";
  return System(name, philosophers_design(n, v));
}

namespace {

std::vector<StateId> state_map_by_name(const Automaton& src, const Automaton& tgt,
                                       const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<StateId> map(src.num_states(), kNone);
  for (const auto& [a, b] : pairs) map[*src.find_state(a)] = *tgt.find_state(b);
  return map;
}

}  // namespace

Comparison p_comparison() {
  return infer_comparison(philosopher_nondet(), philosopher(),
                          state_map_by_name(philosopher_nondet(), philosopher(),
                                            {{"0", "0"}, {"1", "1"}, {"2", "2"}, {"3", "3"},
                                             {"1'", "1"}, {"2'", "2"}, {"3'", "3"}}));
}

Comparison q_comparison() {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 8; ++i) pairs.emplace_back(std::to_string(i), std::to_string(i % 4));
  return infer_comparison(philosopher_double_cover(), philosopher(),
                          state_map_by_name(philosopher_double_cover(), philosopher(), pairs));
}

Comparison r_comparison() {
  const auto src = philosopher_double_cover();
  const auto tgt = philosopher_nondet();
  auto map = state_map_by_name(src, tgt,
                               {{"0", "0"}, {"1", "1"}, {"2", "2"}, {"3", "3"},
                                {"4", "0"}, {"5", "1'"}, {"6", "2'"}, {"7", "3'"}});
  // Two lock motions leave 0 in the target; pin each half of the cover to its branch.
  std::map<MotionId, MotionId> fixed;
  for (MotionId m : src.out(*src.find_state("0")))
    if (!src.is_reflexive(m))
      for (MotionId e : tgt.out(*tgt.find_state("0")))
        if (tgt.target(e) == *tgt.find_state("1")) fixed[m] = e;
  for (MotionId m : src.out(*src.find_state("4")))
    if (!src.is_reflexive(m))
      for (MotionId e : tgt.out(*tgt.find_state("0")))
        if (tgt.target(e) == *tgt.find_state("1'")) fixed[m] = e;
  return infer_comparison(src, tgt, std::move(map), fixed);
}

// ---------------------------------------------------------------------------
// Scheduler

ActionSet control_actions() {
  static const ActionSet c("C", {"begin", "end"});
  return c;
}

ActionSet go_actions() {
  static const ActionSet g("G", {"go"});
  return g;
}

Automaton process() {
  static const Automaton a = [] {
    return AutomatonBuilder("Proc", BoundarySignature{{control_actions()}, std::nullopt})
        .states({"0", "1"})
        .motion("0", "1", {"begin"})
        .motion("1", "0", {"end"})
        .initial("0")
        .build();
  }();
  return a;
}

Automaton notifier() {
  static const Automaton a = [] {
    const auto g = go_actions();
    return AutomatonBuilder("N", BoundarySignature{{g, control_actions(), g}, 1})
        .states({"0", "1", "2", "3", "4"})
        .motion("0", "1", {"go", T, T})
        .motion("1", "4", {T, "begin", T})
        .motion("4", "3", {T, T, "go"})
        .motion("3", "0", {T, "end", T})
        .motion("3", "2", {"go", T, T})
        .motion("2", "1", {T, "end", T})
        .initial("0")
        .build();
  }();
  return a;
}

Automaton master() {
  static const Automaton a = [] {
    const auto g = go_actions();
    return AutomatonBuilder("M", BoundarySignature{{g, control_actions(), g}, 1})
        .states({"0", "1", "2", "3"})
        .motion("0", "1", {T, "begin", T})
        .motion("1", "2", {T, T, "go"})
        .motion("2", "3", {"go", T, T})
        .motion("3", "0", {T, "end", T})
        .motion("3", "2", {T, T, "go"})
        .initial("0")
        .build();
  }();
  return a;
}

Automaton token(int initial) {
  if (initial != 0 && initial != 1) throw InputError("token: initial state must be 0 or 1");
  const auto g = go_actions();
  return AutomatonBuilder(initial == 0 ? "Q" : "Q1", two_sided(g, g))
      .states({"0", "1"})
      .motion("0", "1", {"go", T})
      .motion("1", "0", {T, "go"})
      .initial(std::to_string(initial))
      .build();
}

namespace {

void check_scheduler_size(int n) {
  if (n < 1) throw InputError("scheduler: needs at least one process, got " + std::to_string(n));
}

Design notifier_pair(int i) {
  return Design::bind(Design::var("n" + std::to_string(i), notifier()),
                      Design::var("p" + std::to_string(i), process()), 1, 0);
}

}  // namespace

Design scheduler_design(int n) {
  check_scheduler_size(n);
  Design chain = Design::var("m", master());
  for (int i = 1; i <= n; ++i) chain = Design::bind(chain, notifier_pair(i));
  return Design::feedback(chain, 0, 2);
}

System scheduler(int n) {
  return System("sched" + std::to_string(n),
                Design::bind(scheduler_design(n), Design::var("c", process()), 0, 0));
}

System token_ring(int n) {
  check_scheduler_size(n);
  Design chain = Design::var("qm", token(1));
  for (int i = 1; i <= n; ++i) chain = Design::bind(chain, Design::var("q" + std::to_string(i), token(0)));
  return System("tokens" + std::to_string(n + 1), Design::feedback(chain, 0, 1));
}

Comparison notifier_process_to_token() {
  const auto src = bind(notifier(), process(), 1, 0);
  const auto tgt = token(0);
  return infer_comparison(src, tgt,
                          state_map_by_name(src, tgt,
                                            {{"(0,0)", "0"}, {"(1,0)", "1"}, {"(4,1)", "1"},
                                             {"(3,1)", "0"}, {"(2,1)", "1"}}));
}

Comparison master_process_to_token() {
  const auto src = bind(master(), process(), 1, 0);
  const auto tgt = token(1);
  return infer_comparison(src, tgt,
                          state_map_by_name(src, tgt, {{"(0,0)", "1"}, {"(1,1)", "1"}, {"(2,1)", "0"}, {"(3,1)", "1"}}));
}

System scheduler_grouped(int n) {
  check_scheduler_size(n);
  Design chain = Design::bind(Design::var("m", master()), Design::var("c", process()), 1, 0);
  for (int i = 1; i <= n; ++i) chain = Design::bind(chain, notifier_pair(i));
  return System("sched" + std::to_string(n) + "_grouped", Design::feedback(chain, 0, 1));
}

Simulation scheduler_to_token_ring(int n) {
  check_scheduler_size(n);
  const auto master_sim = verify_simulation(master_process_to_token(), "master abstraction");
  const auto pair_sim = verify_simulation(notifier_process_to_token(), "notifier abstraction");
  Simulation chain = master_sim;
  for (int i = 1; i <= n; ++i) chain = bind_sim(chain, pair_sim, 1, 0);
  return fb_sim(chain, 0, 1);
}

// ---------------------------------------------------------------------------
// Channels and protocol

ActionSet message_actions(const std::vector<std::string>& messages) {
  if (messages.empty()) throw InputError("message set must not be empty");
  return ActionSet("M", messages);
}

ActionSet ack_actions() {
  static const ActionSet a("A", {"ack"});
  return a;
}

namespace {

std::vector<std::string> nontrivial(const ActionSet& x) {
  return {x.actions().begin() + 1, x.actions().end()};
}

AutomatonBuilder channel_base(const std::string& name, const ActionSet& m) {
  AutomatonBuilder b(name, two_sided(m, m));
  b.state("empty");
  for (const auto& x : nontrivial(m)) b.state(x);
  for (const auto& x : nontrivial(m)) {
    b.motion("empty", x, {x, T});
    b.motion(x, "empty", {T, x});
  }
  return b.initial("empty");
}

void add_full_losses(AutomatonBuilder& b, const ActionSet& m) {
  for (const auto& held : nontrivial(m))
    for (const auto& x : nontrivial(m)) b.motion(held, held, {x, T});
}

}  // namespace

Automaton message_passer(const ActionSet& m) { return channel_base("MP_" + m.name(), m).build(); }

Automaton capacity1_channel(const ActionSet& m) {
  auto b = channel_base("C1_" + m.name(), m);
  add_full_losses(b, m);
  return b.build();
}

Automaton lossy_channel(const ActionSet& m) {
  auto b = channel_base("CL_" + m.name(), m);
  add_full_losses(b, m);
  for (const auto& x : nontrivial(m)) b.motion("empty", "empty", {x, T});
  return b.build();
}

Automaton sender(const ActionSet& m, const ActionSet& a) {
  AutomatonBuilder b("S", BoundarySignature{{m, m, a}, 1});
  b.states({"idle", "wait"});
  for (const auto& x : nontrivial(m)) b.state("s_" + x);
  for (const auto& x : nontrivial(m)) {
    b.motion("idle", "s_" + x, {x, T, T});
    b.motion("s_" + x, "wait", {T, x, T});
  }
  b.motion("wait", "idle", {T, T, "ack"});
  return b.initial("idle").build();
}

Automaton receiver(const ActionSet& m, const ActionSet& a) {
  AutomatonBuilder b("R", BoundarySignature{{m, a, m}, 2});
  b.states({"idle", "acking"});
  for (const auto& x : nontrivial(m)) b.state("r_" + x);
  for (const auto& x : nontrivial(m)) {
    b.motion("idle", "r_" + x, {x, T, T});
    b.motion("r_" + x, "acking", {T, T, x});
  }
  b.motion("acking", "idle", {T, "ack", T});
  return b.initial("idle").build();
}

const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::kPerfect: return "perfect";
    case ChannelKind::kCapacity1: return "cap1";
    case ChannelKind::kLossy: return "lossy";
  }
  return "?";
}

Design ack_design(ChannelKind kind, const std::vector<std::string>& messages) {
  const auto m = message_actions(messages);
  const auto a = ack_actions();
  auto s = Design::var("s", sender(m, a));
  auto r = Design::var("r", receiver(m, a));
  if (kind == ChannelKind::kPerfect) return Design::feedback(Design::bind(s, r, 1, 0), 1, 2);
  const bool lossy = kind == ChannelKind::kLossy;
  auto cm = Design::var("cm", lossy ? lossy_channel(m) : capacity1_channel(m));
  auto ca = Design::var("ca", lossy ? lossy_channel(a) : capacity1_channel(a));
  auto channels = Design::product(cm, Design::opposite(ca));
  auto left = Design::feedback(Design::bind(s, channels, 1, 0), 1, 3);
  return Design::feedback(Design::bind(left, r, 1, 0), 1, 2);
}

System ack_protocol(ChannelKind kind, const std::vector<std::string>& messages) {
  return System(std::string("ack_") + to_string(kind) + "_m" + std::to_string(messages.size()),
                ack_design(kind, messages));
}

std::vector<std::string> message_names(int k) {
  if (k < 1) throw InputError("message set must not be empty");
  if (k == 1) return {"m"};
  std::vector<std::string> out;
  for (int i = 1; i <= k; ++i) out.push_back("m" + std::to_string(i));
  return out;
}

// ---------------------------------------------------------------------------
// Zoo

namespace {

Fact reachable_fact(const System& sys, std::size_t want) {
  return {"reachable states = " + std::to_string(want), [sys, want] {
            return expect_eq("reachable", *bfs_deadlocks(sys).reachable, want);
          }};
}

Fact deadlock_count_fact(const System& sys, std::size_t want) {
  return {"reachable deadlocks = " + std::to_string(want), [sys, want] {
            return expect_eq("deadlocks", bfs_deadlocks(sys).deadlocks.size(), want);
          }};
}

Fact misa_explored_fact(const System& sys, std::size_t want) {
  return {"misa explores " + std::to_string(want) + " states (atomic)", [sys, want] {
            CheckOptions opt;
            opt.mode = Mode::kAtomic;
            return expect_eq("misa explored", misa_deadlocks(sys, opt).explored, want);
          }};
}

Fact has_deadlock_fact(const System& sys) {
  return {"some reachable deadlock", [sys]() -> std::string {
            if (bfs_deadlocks(sys).deadlocks.empty()) return "no deadlock found";
            return {};
          }};
}

Fact cycle_fact(const System& sys, std::size_t len) {
  return {"reachable part is a cycle of " + std::to_string(len) + " states", [sys, len]() -> std::string {
            const auto r = reachable(evaluate(sys));
            if (r.num_states() != len) return expect_eq("cycle length", r.num_states(), len);
            for (StateId v = 0; v < r.num_states(); ++v) {
              std::size_t out = 0;
              for (MotionId m : r.out(v)) out += !r.is_reflexive(m);
              if (out != 1) return "state " + r.state_name(v) + " has " + std::to_string(out) + " successors";
            }
            return {};
          }};
}

}  // namespace

std::vector<ModelInstance> zoo() {
  std::vector<ModelInstance> out;
  for (int n = 2; n <= 5; ++n) {
    auto sys = philosophers(n);
    const std::size_t nn = n;
    out.push_back({"philosophers", sys,
                   {reachable_fact(sys, pow_int(3, n) - 1), deadlock_count_fact(sys, 1),
                    misa_explored_fact(sys, 3 * nn * nn - 3 * nn + 2)}});
  }
  for (auto v : {Variant::kNondet, Variant::kDoubleCover})
    for (int n = 2; n <= 4; ++n) {
      auto sys = philosophers(n, v);
      out.push_back({std::string("philosophers-") + to_string(v), sys, {deadlock_count_fact(sys, pow_int(2, n))}});
    }
  for (int n = 1; n <= 3; ++n) {
    auto sys = scheduler(n);
    out.push_back({"scheduler", sys, {deadlock_count_fact(sys, 0)}});
    auto ring = token_ring(n);
    out.push_back({"token-ring", ring, {cycle_fact(ring, n + 1), deadlock_count_fact(ring, 0)}});
  }
  for (int k = 1; k <= 2; ++k) {
    const auto msgs = message_names(k);
    auto perfect = ack_protocol(ChannelKind::kPerfect, msgs);
    out.push_back({"ack-perfect", perfect, {deadlock_count_fact(perfect, 0)}});
    auto cap1 = ack_protocol(ChannelKind::kCapacity1, msgs);
    std::vector<Fact> facts{deadlock_count_fact(cap1, 0)};
    if (k == 1) facts.push_back(reachable_fact(cap1, 6));
    out.push_back({"ack-cap1", cap1, std::move(facts)});
    auto lossy = ack_protocol(ChannelKind::kLossy, msgs);
    out.push_back({"ack-lossy", lossy, {has_deadlock_fact(lossy)}});
  }
  return out;
}

}  // namespace awb::models

// ---------------------------------------------------------------------------
// Golden files

namespace awb::models {

namespace {

std::vector<std::pair<std::string, std::string>> identity_pairs(const Automaton& a) {
  std::vector<std::pair<std::string, std::string>> out;
  for (StateId v = 0; v < a.num_states(); ++v) out.emplace_back(a.state_name(v), a.state_name(v));
  return out;
}

std::vector<std::pair<std::string, std::string>> state_pairs(const Comparison& f) {
  std::vector<std::pair<std::string, std::string>> out;
  for (StateId v = 0; v < f.source.num_states(); ++v)
    if (f.state_map[v] != kNone) out.emplace_back(f.source.state_name(v), f.target.state_name(f.state_map[v]));
  return out;
}

ModelFile philosophers_file(int n) {
  ModelFile f;
  f.actionsets = {lock_actions()};
  f.automata = {philosopher(), fork(), philosopher_nondet(), philosopher_double_cover()};
  const auto d = philosophers_design(n);
  const std::string base = "phil" + std::to_string(n);
  f.designs.push_back({"ring" + std::to_string(n), d});
  f.systems.emplace_back(base, d);
  std::map<std::string, Automaton> nondet, dcover;
  for (int i = 1; i <= n; ++i) {
    nondet.emplace("p" + std::to_string(i), philosopher_nondet());
    dcover.emplace("p" + std::to_string(i), philosopher_double_cover());
  }
  f.systems.emplace_back(base + "_nondet", d, nondet);
  f.systems.emplace_back(base + "_dcover", d, dcover);

  MapDecl p{"p_prime_to_p", true, MapDecl::Kind::kExplicit, "Pprime", "P", state_pairs(p_comparison()), {}, {}};
  MapDecl q{"p_dprime_to_p", true, MapDecl::Kind::kExplicit, "Pdprime", "P", state_pairs(q_comparison()), {}, {}};
  const auto rc = r_comparison();
  MapDecl r{"p_dprime_to_p_prime", true, MapDecl::Kind::kExplicit, "Pdprime", "Pprime", state_pairs(rc), {}, {}};
  for (StateId v : {StateId{0}, StateId{4}})
    for (MotionId m : rc.source.out(v))
      if (!rc.source.is_reflexive(m)) r.motions.emplace_back(rc.source.motion_name(m), rc.target.motion_name(rc.motion_map[m]));
  MapDecl tilde{"p_tilde", true, MapDecl::Kind::kLift, base + "_nondet", base, {}, {}, {}};
  MapDecl qtilde{"q_tilde", true, MapDecl::Kind::kLift, base + "_dcover", base, {}, {}, {}};
  for (int i = 1; i <= n; ++i) {
    tilde.lifts.emplace_back("p" + std::to_string(i), p.name);
    qtilde.lifts.emplace_back("p" + std::to_string(i), q.name);
  }
  MapDecl ident{"identity_P", true, MapDecl::Kind::kExplicit, "P", "P", identity_pairs(philosopher()), {}, {}};
  f.maps = {p, q, r, tilde, qtilde, ident};
  return f;
}

ModelFile scheduler_file(int n) {
  ModelFile f;
  f.actionsets = {control_actions(), go_actions()};
  f.automata = {process(), notifier(), master(), token(0), token(1)};
  f.designs.push_back({"NP", Design::bind(Design::var("n", notifier()), Design::var("p", process()), 1, 0)});
  f.designs.push_back({"MP", Design::bind(Design::var("m", master()), Design::var("c", process()), 1, 0)});
  f.designs.push_back({"sched" + std::to_string(n) + "_open", scheduler_design(n)});
  f.systems.push_back(scheduler(n));
  f.systems.push_back(token_ring(n));
  f.maps.push_back({"np_to_q", true, MapDecl::Kind::kExplicit, "NP", "Q", state_pairs(notifier_process_to_token()), {}, {}});
  f.maps.push_back({"mp_to_q1", true, MapDecl::Kind::kExplicit, "MP", "Q1", state_pairs(master_process_to_token()), {}, {}});
  return f;
}

ModelFile protocol_file(int k) {
  ModelFile f;
  const auto m = message_actions(message_names(k));
  const auto a = ack_actions();
  f.actionsets = {m, a};
  f.automata = {message_passer(m), capacity1_channel(m), capacity1_channel(a), lossy_channel(m), lossy_channel(a),
                sender(m, a), receiver(m, a)};
  for (auto kind : {ChannelKind::kPerfect, ChannelKind::kCapacity1, ChannelKind::kLossy})
    f.systems.push_back(ack_protocol(kind, message_names(k)));
  return f;
}

}  // namespace

std::vector<std::pair<std::string, ModelFile>> golden_models() {
  return {{"philosophers3.awb", philosophers_file(3)},
          {"philosophers5.awb", philosophers_file(5)},
          {"scheduler3.awb", scheduler_file(3)},
          {"protocol1.awb", protocol_file(1)},
          {"protocol2.awb", protocol_file(2)}};
}

}  // namespace awb::models
