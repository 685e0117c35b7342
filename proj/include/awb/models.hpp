#pragma once

#include <functional>
#include <string>
#include <vector>

#include "awb/design.hpp"
#include "awb/model_file.hpp"
#include "awb/simulation.hpp"

namespace awb::models {

// Dining philosophers.
ActionSet lock_actions();  // L = {tau, lock, unlock}
Automaton philosopher();
Automaton fork();
Automaton philosopher_nondet();        // two branches through 1..3 and 1'..3'
Automaton philosopher_double_cover();  // eight-state cycle

enum class Variant { kStandard, kNondet, kDoubleCover };
const char* to_string(Variant v);
Automaton philosopher(Variant v);

/// fb<0,2n-1>( (p1:P ; f1:Q) ; ... ; (pn:P ; fn:Q) )
Design philosophers_design(int n, Variant v = Variant::kStandard);
System philosophers(int n, Variant v = Variant::kStandard);

/// P' => P, P'' => P and P'' => P' (the last sends the second half of the
/// double cover onto the primed branch).
Comparison p_comparison();
Comparison q_comparison();
Comparison r_comparison();

// Scheduler.
ActionSet control_actions();  // C = {tau, begin, end}
ActionSet go_actions();       // G = {tau, go}
Automaton process();
Automaton notifier();
Automaton master();
/// Alternates go on its left and right boundary; `initial` is 0 or 1.
Automaton token(int initial);

/// Master and n notifier/process pairs in a ring; the master's control
/// boundary stays open.
Design scheduler_design(int n);
/// The scheduler closed by a controlling process.
System scheduler(int n);
/// Ring of n+1 token automata, the master-side copy starting at 1.
System token_ring(int n);

Comparison notifier_process_to_token();  // bind(N,P) => token(0)
Comparison master_process_to_token();    // bind(M,P) on the control boundary => token(1)

/// Scheduler regrouped as fb( (M;P) ; (N;P) ; ... ), same evaluation up to
/// component order, and its simulation onto the token ring.
System scheduler_grouped(int n);
Simulation scheduler_to_token_ring(int n);

// Channels and the acknowledgement protocol.
ActionSet message_actions(const std::vector<std::string>& messages);  // M
ActionSet ack_actions();                                              // A = {tau, ack}
Automaton message_passer(const ActionSet& m);
Automaton capacity1_channel(const ActionSet& m);
Automaton lossy_channel(const ActionSet& m);
Automaton sender(const ActionSet& m, const ActionSet& a);
Automaton receiver(const ActionSet& m, const ActionSet& a);

enum class ChannelKind { kPerfect, kCapacity1, kLossy };
const char* to_string(ChannelKind k);

/// Sender and receiver joined directly (perfect) or through a pair of
/// channels running in opposite directions.
Design ack_design(ChannelKind kind, const std::vector<std::string>& messages);
System ack_protocol(ChannelKind kind, const std::vector<std::string>& messages);

/// Messages m1..mk, or just m when k = 1.
std::vector<std::string> message_names(int k);

// Zoo.

/// An executable expectation; `check` returns an empty string when it holds.
struct Fact {
  std::string description;
  std::function<std::string()> check;
};

struct ModelInstance {
  std::string family;
  System system;
  std::vector<Fact> facts;
};

std::vector<ModelInstance> zoo();

/// Model files for the worked examples, keyed by file name.
std::vector<std::pair<std::string, ModelFile>> golden_models();

}  // namespace awb::models
