#include "awb/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "awb/algebra.hpp"
#include "awb/checker.hpp"
#include "awb/core.hpp"
#include "awb/model_file.hpp"
#include "awb/models.hpp"
#include "awb/report.hpp"
#include "json.hpp"

namespace awb {

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write '" + path + "'");
  os << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t env_max_states() {
  const char* v = std::getenv("AWB_MAX_STATES");
  if (!v || !*v) return 0;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw InputError(std::string("AWB_MAX_STATES is not a number: '") + v + "'");
  }
}

// Component names and local state names of a state of `a`, where `ref`
// names an automaton or a system in `f`.
struct StateRenderer {
  std::vector<std::string> components;
  std::function<std::vector<std::string>(StateId)> names;
};

StateRenderer renderer_for(const ModelFile& f, const std::string& ref, const Automaton& a) {
  if (f.find_automaton(ref)) return {{ref}, [a](StateId v) { return std::vector<std::string>{a.state_name(v)}; }};
  const System sys = f.resolve_system(ref);
  StateRenderer r;
  for (const auto& c : sys.diagram().components) r.components.push_back(c.name);
  r.names = [a, sys](StateId v) {
    const auto leaves = a.leaf_states(v);
    std::vector<std::string> out;
    for (std::size_t c = 0; c < leaves.size(); ++c) out.push_back(sys.automaton(c).state_name(leaves[c]));
    return out;
  };
  return r;
}

// Subsystem of the overrides mentioning variables that occur in `d`.
System subsystem(const System& sys, const Design& d, const std::string& name) {
  std::map<std::string, Automaton> ov;
  for (const auto& c : flatten(d).components)
    if (c.var)
      if (auto it = sys.overrides().find(*c.var); it != sys.overrides().end()) ov.insert(*it);
  return System(name, d, ov);
}

std::string word_string(const Automaton& a, const std::vector<std::size_t>& bs, const std::vector<ActionId>& letter) {
  std::string s;
  for (std::size_t i = 0; i < letter.size(); ++i) s += (i ? "|" : "") + a.signature()[bs[i]].action_name(letter[i]);
  return s;
}

struct Cli {
  std::ostream& out;
  std::ostream& err;

  void emit(const std::string& text, const std::string& path) {
    if (!path.empty()) write_file(path, text);
    out << text;
  }

  int check(const std::string& model, const std::string& system, const std::string& algo, const std::string& mode,
            const std::string& strength, const std::string& json_path, std::optional<std::size_t> max_states, bool witness,
            unsigned threads, const std::string& order, bool stable) {
    const ModelFile f = load_model(model);
    const System sys = f.resolve_system(system);
    CheckOptions opt;
    opt.mode = parse_mode(mode);
    opt.max_states = max_states ? *max_states : env_max_states();
    opt.witnesses = witness;
    opt.threads = std::max(1u, threads);
    if (order != "fifo" && order != "lifo") throw InputError("unknown order '" + order + "' (fifo or lifo)");
    opt.order = order == "fifo" ? Order::kFifo : Order::kLifo;
    try {
      DeadlockReport r;
      if (algo == "bfs") {
        r = bfs_deadlocks(sys, opt);
      } else if (algo == "misa") {
        r = misa_deadlocks(sys, opt);
      } else if (algo == "product") {
        if (sys.design().kind() != Design::Kind::kProduct)
          throw InputError("--algo product needs a system whose design is a product, '" + system + "' is " +
                           sys.design().to_string());
        if (strength != "weak" && strength != "strong")
          throw InputError("unknown strength '" + strength + "' (weak or strong)");
        const auto& ch = sys.design().children();
        auto left = evaluate(subsystem(sys, ch[0], system + ".left"));
        auto right = evaluate(subsystem(sys, ch[1], system + ".right"));
        r = product_deadlock_analysis(left, right, strength == "weak" ? Strength::kWeak : Strength::kStrong).report;
        r.system = system;
      } else {
        throw InputError("unknown algorithm '" + algo + "' (bfs, misa or product)");
      }
      emit(report_to_json(r, "check", stable), json_path);
      return 0;
    } catch (const ResourceError& e) {
      emit(report_to_json(e.partial(), "check", stable), json_path);
      err << "awb: " << e.what() << "\n";
      return 2;
    }
  }

  int eval(const std::string& model, const std::string& system, bool reachable_only, bool linear,
           const std::string& out_path) {
    const ModelFile f = load_model(model);
    Automaton a = f.resolve_automaton(system);
    if (reachable_only) a = reachable(a);
    if (linear) a = linearize(a);
    emit(render_automaton_file(a, system), out_path);
    return 0;
  }

  int sim_verify(const std::string& model, const std::string& sim, const std::string& json_path) {
    const ModelFile f = load_model(model);
    const MapDecl* decl = f.find_map(sim);
    if (!decl) throw InputError("no comparison or simulation named '" + sim + "'");
    json j;
    j["sim"] = sim;
    j["source"] = decl->source;
    j["target"] = decl->target;
    if (decl->kind == MapDecl::Kind::kLift) {
      try {
        const Simulation s = f.simulation(sim);
        j["verified"] = true;
        j["liftings"] = s.certificate().size();
      } catch (const InputError& e) {
        j["verified"] = false;
        j["reason"] = e.what();
      }
    } else {
      const Comparison c = f.comparison(sim);
      const auto check = check_simulation(c);
      j["verified"] = check.ok();
      if (check.ok()) {
        j["liftings"] = check.simulation->certificate().size();
      } else {
        j["reason"] = check.describe(c);
        if (check.counterexample)
          j["counterexample"] = {{"state", c.source.state_name(check.counterexample->first)},
                                 {"target_motion", c.target.motion_name(check.counterexample->second)}};
      }
    }
    emit(j.dump(2) + "\n", json_path);
    return 0;
  }

  int sim_preimage(const std::string& model, const std::string& sim, const std::string& report_path,
                   const std::string& json_path, bool stable) {
    const ModelFile f = load_model(model);
    const MapDecl* decl = f.find_map(sim);
    if (!decl) throw InputError("no simulation named '" + sim + "'");
    const auto start = std::chrono::steady_clock::now();
    const Simulation s = f.simulation(sim);
    const Automaton& tgt = s.target();
    std::vector<StateId> dead;
    for (const auto& d : report_deadlocks(read_file(report_path))) {
      if (f.find_automaton(decl->target)) {
        if (d.size() != 1) throw InputError("report deadlock does not describe a single automaton state");
        auto v = tgt.find_state(d.begin()->second);
        if (!v) throw InputError("'" + decl->target + "' has no state '" + d.begin()->second + "'");
        dead.push_back(*v);
        continue;
      }
      const System sys = f.resolve_system(decl->target);
      std::vector<StateId> tuple(sys.size(), kNone);
      for (const auto& [comp, state] : d) {
        auto c = sys.find_component(comp);
        if (!c) throw InputError("report names unknown component '" + comp + "'");
        auto v = sys.automaton(*c).find_state(state);
        if (!v) throw InputError("component '" + comp + "' has no state '" + state + "'");
        tuple[*c] = *v;
      }
      if (std::count(tuple.begin(), tuple.end(), kNone))
        throw InputError("report deadlock does not give every component of '" + decl->target + "'");
      auto v = tgt.state_from_leaves(tuple);
      if (!v) throw InputError("report deadlock is not a state of '" + decl->target + "'");
      dead.push_back(*v);
    }
    const auto pre = preimage_deadlock_check(s, dead);
    const auto rend = renderer_for(f, decl->source, s.source());
    DeadlockReport r;
    r.algorithm = "preimage";
    r.system = decl->source;
    r.mode = "all";
    r.explored = pre.preimage.size();
    r.component_names = rend.components;
    for (StateId v : pre.deadlocks) r.deadlock_names.push_back(rend.names(v));
    std::sort(r.deadlock_names.begin(), r.deadlock_names.end());
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    emit(report_to_json(r, "sim-preimage", stable), json_path);
    return 0;
  }

  int lang_equiv(const std::string& model, const std::string& left, const std::string& right,
                 std::optional<std::size_t> max_len, const std::vector<std::size_t>& boundaries) {
    const ModelFile f = load_model(model);
    const Automaton l = f.resolve_automaton(left);
    const Automaton r = f.resolve_automaton(right);
    const auto res = reduced_language_equiv(l, r, boundaries, max_len);
    std::vector<std::size_t> bs = boundaries;
    if (bs.empty())
      for (std::size_t i = 0; i < l.arity(); ++i) bs.push_back(i);
    json j;
    j["left"] = left;
    j["right"] = right;
    j["boundaries"] = bs;
    j["max_len"] = max_len ? json(*max_len) : json(nullptr);
    j["equivalent"] = res.equivalent;
    if (!res.equivalent) {
      json w = json::array();
      for (const auto& letter : res.counterexample) w.push_back(word_string(l, bs, letter));
      j["counterexample"] = w;
      j["only_in"] = res.in_left ? left : right;
    }
    out << j.dump(2) << "\n";
    return 0;
  }

  int stats(const std::string& model, const std::string& system) {
    const ModelFile f = load_model(model);
    const System sys = f.resolve_system(system);
    json j;
    j["system"] = sys.name();
    j["design"] = sys.design().to_string();
    json comps = json::array();
    double total = 1;
    for (std::size_t c = 0; c < sys.size(); ++c) {
      const auto& a = sys.automaton(c);
      total *= a.num_states();
      comps.push_back({{"name", sys.diagram().components[c].name},
                       {"automaton", a.name()},
                       {"states", a.num_states()},
                       {"motions", a.num_motions()},
                       {"linear", is_linear(a)}});
    }
    j["components"] = comps;
    j["wires"] = sys.diagram().wires.size();
    j["open_ports"] = sys.diagram().open_ports.size();
    j["closed"] = sys.is_closed();
    j["all_linear"] = sys.all_linear();
    // exact while it fits in a double's mantissa
    if (total < 9007199254740992.0)
      j["global_states"] = static_cast<std::uint64_t>(total);
    else
      j["global_states"] = total;
    out << j.dump(2) << "\n";
    return 0;
  }

  int export_models(const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, file] : models::golden_models()) {
      const auto path = (std::filesystem::path(dir) / name).string();
      write_file(path, "# Generated by `awb export-models`.\n" + render_model(file));
      out << path << "\n";
    }
    return 0;
  }

  int zoo() {
    int failed = 0;
    for (const auto& inst : models::zoo())
      for (const auto& fact : inst.facts) {
        const std::string msg = fact.check();
        out << (msg.empty() ? "ok   " : "FAIL ") << inst.system.name() << ": " << fact.description;
        if (!msg.empty()) out << " (" << msg << ")";
        out << "\n";
        failed += !msg.empty();
      }
    return failed ? 1 : 0;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Automata with boundary: composition, deadlock checking and simulations", "awb"};
  app.require_subcommand(1);
  Cli cli{out, err};
  std::string model, system, algo = "bfs", mode = "all", strength = "weak", json_path, order = "fifo";
  std::optional<std::size_t> max_states;
  unsigned threads = 1;
  bool witness = false, stable = false, reachable_only = false, linear = false;
  std::string sim, report, left, right, dir = "models";
  std::optional<std::size_t> max_len;
  std::vector<std::size_t> boundaries;

  auto* check = app.add_subcommand("check", "Search a system for reachable deadlocks");
  check->add_option("model", model, "Model file")->required();
  check->add_option("--system", system, "System or design name")->required();
  check->add_option("--algo", algo, "bfs, misa or product")->capture_default_str();
  check->add_option("--mode", mode, "all or atomic")->capture_default_str();
  check->add_option("--strength", strength, "weak or strong (product analysis)")->capture_default_str();
  check->add_option("--json", json_path, "Also write the report here");
  check->add_option("--max-states", max_states, "State budget (0 = unlimited; default from AWB_MAX_STATES)");
  check->add_flag("--witness", witness, "Record a path to each deadlock");
  check->add_option("--threads", threads, "Frontier workers")->capture_default_str();
  check->add_option("--order", order, "fifo or lifo")->capture_default_str();
  check->add_flag("--stable", stable, "Report elapsed_ms as 0");

  auto* eval = app.add_subcommand("eval", "Evaluate a system to an explicit automaton");
  eval->add_option("model", model, "Model file")->required();
  eval->add_option("--system", system, "Automaton, design or system name")->required();
  eval->add_flag("--reachable-only", reachable_only, "Keep the part reachable from the initial state");
  eval->add_flag("--linearize", linear, "Keep linear motions only");
  eval->add_option("--out", json_path, "Also write the automaton here");

  auto* verify = app.add_subcommand("sim-verify", "Check the lifting property of a declared map");
  verify->add_option("model", model, "Model file")->required();
  verify->add_option("--sim", sim, "Comparison or simulation name")->required();
  verify->add_option("--json", json_path, "Also write the result here");

  auto* preimage = app.add_subcommand("sim-preimage", "Source deadlocks over target deadlocks");
  preimage->add_option("model", model, "Model file")->required();
  preimage->add_option("--sim", sim, "Simulation name")->required();
  preimage->add_option("--target-report", report, "JSON report of the target's deadlocks")->required();
  preimage->add_option("--json", json_path, "Also write the report here");
  preimage->add_flag("--stable", stable, "Report elapsed_ms as 0");

  auto* lang = app.add_subcommand("lang-equiv", "Compare reduced-appearance languages");
  lang->add_option("model", model, "Model file")->required();
  lang->add_option("--left", left, "Automaton, design or system")->required();
  lang->add_option("--right", right, "Automaton, design or system")->required();
  lang->add_option("--max-len", max_len, "Compare words up to this length only");
  lang->add_option("--boundaries", boundaries, "Boundary indices (default all)")->delimiter(',');

  auto* stats = app.add_subcommand("stats", "Components, wires and sizes of a system");
  stats->add_option("model", model, "Model file")->required();
  stats->add_option("--system", system, "System or design name")->required();

  auto* exp = app.add_subcommand("export-models", "Write the golden model files");
  exp->add_option("dir", dir, "Output directory")->capture_default_str();

  auto* zoo = app.add_subcommand("zoo", "Check the expected facts of every generated model");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (*check) return cli.check(model, system, algo, mode, strength, json_path, max_states, witness, threads, order, stable);
    if (*eval) return cli.eval(model, system, reachable_only, linear, json_path);
    if (*verify) return cli.sim_verify(model, sim, json_path);
    if (*preimage) return cli.sim_preimage(model, sim, report, json_path, stable);
    if (*lang) return cli.lang_equiv(model, left, right, max_len, boundaries);
    if (*stats) return cli.stats(model, system);
    if (*exp) return cli.export_models(dir);
    if (*zoo) return cli.zoo();
  } catch (const ResourceError& e) {
    err << "awb: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "awb: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "awb: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace awb
