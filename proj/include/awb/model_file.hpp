#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "awb/design.hpp"
#include "awb/error.hpp"
#include "awb/simulation.hpp"

namespace awb {

/// Syntax or resolution error at a position of a model file.
class ParseError : public InputError {
 public:
  ParseError(const std::string& file, std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_, column_;
  std::string message_;
};

/// A declared comparison or simulation. References name an automaton, a
/// design (evaluated with its inline assignments) or a system.
struct MapDecl {
  enum class Kind { kExplicit, kLift };
  std::string name;
  bool simulation = true;  // `simulation` or plain `comparison`
  Kind kind = Kind::kExplicit;
  std::string source, target;
  std::vector<std::pair<std::string, std::string>> states;   // explicit
  std::vector<std::pair<std::string, std::string>> motions;  // explicit, optional
  std::vector<std::pair<std::string, std::string>> lifts;    // variable -> declared simulation
};

struct NamedDesign {
  std::string name;
  Design design;
};

class ModelFile {
 public:
  std::vector<ActionSet> actionsets;
  std::vector<Automaton> automata;
  std::vector<NamedDesign> designs;
  std::vector<System> systems;
  std::vector<MapDecl> maps;

  const ActionSet* find_actionset(std::string_view name) const;
  const Automaton* find_automaton(std::string_view name) const;
  const Design* find_design(std::string_view name) const;
  const System* find_system(std::string_view name) const;
  const MapDecl* find_map(std::string_view name) const;

  /// System named `ref`, or a system wrapping the design named `ref`.
  System resolve_system(const std::string& ref) const;
  /// Automaton, or evaluation of a design or system.
  Automaton resolve_automaton(const std::string& ref) const;

  /// The declared map as a comparison (lifted maps are built and verified).
  Comparison comparison(const std::string& name) const;
  /// The declared map, verified as a simulation; throws InputError otherwise.
  Simulation simulation(const std::string& name) const;
};

ModelFile parse_model(std::string_view text, const std::string& filename = "<input>");
ModelFile load_model(const std::string& path);

/// Canonical text; parse_model(render_model(f)) declares the same entities.
std::string render_model(const ModelFile& f);

/// Bare identifier when possible, otherwise a double-quoted string.
std::string quote_name(std::string_view name);

/// A single automaton (with its action sets) as model text, optionally
/// declared under another name.
std::string render_automaton_file(const Automaton& a, const std::string& name = {});

}  // namespace awb
