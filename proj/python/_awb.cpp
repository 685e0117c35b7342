#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "awb/algebra.hpp"
#include "awb/checker.hpp"
#include "awb/core.hpp"
#include "awb/error.hpp"
#include "awb/model_file.hpp"
#include "awb/models.hpp"
#include "awb/report.hpp"
#include "awb/simulation.hpp"

namespace py = pybind11;
using namespace awb;

namespace {

std::vector<std::string> state_names(const Automaton& a) {
  std::vector<std::string> out;
  for (StateId v = 0; v < a.num_states(); ++v) out.push_back(a.state_name(v));
  return out;
}

std::vector<std::string> motion_names(const Automaton& a) {
  std::vector<std::string> out;
  for (MotionId m = 0; m < a.num_motions(); ++m) out.push_back(a.motion_name(m));
  return out;
}

// (source, target, labels) per motion, labels by action name.
std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> motions(const Automaton& a) {
  std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> out;
  for (MotionId m = 0; m < a.num_motions(); ++m) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < a.arity(); ++i) labels.push_back(a.signature()[i].action_name(a.label(m, i)));
    out.emplace_back(a.state_name(a.source(m)), a.state_name(a.target(m)), labels);
  }
  return out;
}

std::string check_json(const System& sys, const std::string& algo, const std::string& mode, std::size_t max_states,
                       bool witnesses, unsigned threads, bool stable) {
  CheckOptions opt;
  opt.mode = parse_mode(mode);
  opt.max_states = max_states;
  opt.witnesses = witnesses;
  opt.threads = threads;
  DeadlockReport r;
  if (algo == "bfs")
    r = bfs_deadlocks(sys, opt);
  else if (algo == "misa")
    r = misa_deadlocks(sys, opt);
  else
    throw InputError("unknown algorithm '" + algo + "' (bfs or misa)");
  return report_to_json(r, "check", stable);
}

py::dict simulation_result(const ModelFile& f, const std::string& name) {
  const auto c = f.comparison(name);
  const auto chk = check_simulation(c);
  py::dict d;
  d["verified"] = chk.ok();
  if (chk.ok()) {
    d["liftings"] = chk.simulation->certificate().size();
  } else {
    d["reason"] = chk.describe(c);
    if (chk.counterexample) {
      d["state"] = c.source.state_name(chk.counterexample->first);
      d["target_motion"] = c.target.motion_name(chk.counterexample->second);
    }
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_awb, m) {
  m.doc() = "Automata with boundary: composition, deadlock search and simulations";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  static py::handle resource_error = py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  // args are (message, partial report as JSON text)
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ResourceError& e) {
      py::set_error(resource_error, py::make_tuple(e.what(), report_to_json(e.partial(), "check", true)));
    }
  });

  py::class_<Automaton>(m, "Automaton")
      .def_property_readonly("name", &Automaton::name)
      .def_property_readonly("arity", &Automaton::arity)
      .def_property_readonly("num_states", &Automaton::num_states)
      .def_property_readonly("num_motions", &Automaton::num_motions)
      .def_property_readonly("signature", [](const Automaton& a) { return a.signature().to_string(); })
      .def_property_readonly("initial",
                             [](const Automaton& a) -> std::optional<std::string> {
                               if (!a.initial()) return std::nullopt;
                               return a.state_name(*a.initial());
                             })
      .def_property_readonly("states", &state_names)
      .def_property_readonly("motion_names", &motion_names)
      .def("motions", &motions)
      .def("is_linear", [](const Automaton& a) { return is_linear(a); })
      .def("deadlocks",
           [](const Automaton& a) {
             std::vector<std::string> out;
             for (StateId v = 0; v < a.num_states(); ++v)
               if (is_deadlock(a, v)) out.push_back(a.state_name(v));
             return out;
           })
      .def("to_model", [](const Automaton& a) { return render_automaton_file(a); })
      .def("__repr__", [](const Automaton& a) {
        return "<Automaton " + a.name() + " : " + a.signature().to_string() + ", " + std::to_string(a.num_states()) +
               " states>";
      });

  py::class_<System>(m, "System")
      .def_property_readonly("name", &System::name)
      .def_property_readonly("design", [](const System& s) { return s.design().to_string(); })
      .def_property_readonly("components",
                             [](const System& s) {
                               std::vector<std::string> out;
                               for (const auto& c : s.diagram().components) out.push_back(c.name);
                               return out;
                             })
      .def_property_readonly("closed", &System::is_closed)
      .def("check_json", &check_json, py::arg("algo") = "bfs", py::arg("mode") = "all", py::arg("max_states") = 0,
           py::arg("witnesses") = false, py::arg("threads") = 1, py::arg("stable") = false)
      .def("__repr__", [](const System& s) { return "<System " + s.name() + " = " + s.design().to_string() + ">"; });

  py::class_<ModelFile>(m, "ModelFile")
      .def_property_readonly("automata",
                             [](const ModelFile& f) {
                               std::vector<std::string> out;
                               for (const auto& a : f.automata) out.push_back(a.name());
                               return out;
                             })
      .def_property_readonly("systems",
                             [](const ModelFile& f) {
                               std::vector<std::string> out;
                               for (const auto& s : f.systems) out.push_back(s.name());
                               return out;
                             })
      .def_property_readonly("maps",
                             [](const ModelFile& f) {
                               std::vector<std::string> out;
                               for (const auto& d : f.maps) out.push_back(d.name);
                               return out;
                             })
      .def("system", &ModelFile::resolve_system)
      .def("automaton", &ModelFile::resolve_automaton)
      .def("verify_simulation", &simulation_result)
      .def("render", [](const ModelFile& f) { return render_model(f); });

  m.def("parse_model", &parse_model, py::arg("text"), py::arg("filename") = "<input>");
  m.def("load_model", &load_model);
  m.def("evaluate", &evaluate);
  m.def("reachable", py::overload_cast<const Automaton&>(&reachable));
  m.def("linearize", &linearize);
  m.def("bind", py::overload_cast<const Automaton&, const Automaton&, std::size_t, std::size_t>(&bind));
  m.def("feedback", &feedback);
  m.def("product", &product);
  m.def("opposite", &opposite);
  m.def("isomorphic", [](const Automaton& a, const Automaton& b) { return isomorphic(a, b).has_value(); });
  m.def(
      "language_equivalent",
      [](const Automaton& a, const Automaton& b, std::optional<std::size_t> max_len) {
        return reduced_language_equiv(a, b, {}, max_len).equivalent;
      },
      py::arg("left"), py::arg("right"), py::arg("max_len") = py::none());

  m.def(
      "philosophers",
      [](int n, const std::string& variant) {
        if (variant == "standard") return models::philosophers(n);
        if (variant == "nondet") return models::philosophers(n, models::Variant::kNondet);
        if (variant == "dcover") return models::philosophers(n, models::Variant::kDoubleCover);
        throw InputError("unknown variant '" + variant + "' (standard, nondet or dcover)");
      },
      py::arg("n"), py::arg("variant") = "standard");
  m.def("scheduler", &models::scheduler);
  m.def("token_ring", &models::token_ring);
  m.def(
      "ack_protocol",
      [](const std::string& kind, int messages) {
        models::ChannelKind k;
        if (kind == "perfect") k = models::ChannelKind::kPerfect;
        else if (kind == "cap1") k = models::ChannelKind::kCapacity1;
        else if (kind == "lossy") k = models::ChannelKind::kLossy;
        else throw InputError("unknown channel '" + kind + "' (perfect, cap1 or lossy)");
        return models::ack_protocol(k, models::message_names(messages));
      },
      py::arg("kind"), py::arg("messages") = 1);
}
