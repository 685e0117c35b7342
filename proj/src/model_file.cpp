#include "awb/model_file.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "awb/algebra.hpp"

namespace awb {

ParseError::ParseError(const std::string& file, std::size_t line, std::size_t column, const std::string& message)
    : InputError(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "actionset", "automaton", "design", "system", "simulation", "comparison", "states", "init", "motion",
    "state",     "as",        "with",   "lift",   "fb",         "id",         "diag",   "op",   "tau"};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.' || c == '@' || c == '#';
}

enum class Tok { kName, kString, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::size_t line = 0, column = 0;
};

std::vector<Token> lex(std::string_view src, const std::string& file) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n = 1) {
    for (; n > 0 && i < src.size(); --n, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance();
    } else if (ident_char(c)) {
      Token t{Tok::kName, {}, line, col};
      while (i < src.size() && ident_char(src[i])) {
        t.text += src[i];
        advance();
      }
      out.push_back(std::move(t));
    } else if (c == '"') {
      Token t{Tok::kString, {}, line, col};
      advance();
      for (;;) {
        if (i >= src.size() || src[i] == '\n') throw ParseError(file, t.line, t.column, "unterminated string");
        if (src[i] == '"') break;
        if (src[i] == '\\' && i + 1 < src.size()) advance();
        t.text += src[i];
        advance();
      }
      advance();
      out.push_back(std::move(t));
    } else {
      Token t{Tok::kPunct, std::string(1, c), line, col};
      if ((c == '-' || c == '=') && i + 1 < src.size() && src[i + 1] == '>') t.text += '>';
      if (std::string_view("{}()[]<>,;:*=").find(c) == std::string_view::npos && t.text.size() == 1)
        throw ParseError(file, line, col, std::string("unexpected character '") + c + "'");
      advance(t.text.size());
      out.push_back(std::move(t));
    }
  }
  out.push_back({Tok::kEnd, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, std::string file) : file_(std::move(file)), toks_(lex(text, file_)) {}

  ModelFile run() {
    while (peek().kind != Tok::kEnd) {
      const Token& t = peek();
      if (is_kw("actionset")) parse_actionset();
      else if (is_kw("automaton")) parse_automaton();
      else if (is_kw("design")) parse_design();
      else if (is_kw("system")) parse_system();
      else if (is_kw("simulation") || is_kw("comparison")) parse_map();
      else fail(t, "expected a declaration, found " + describe(t));
    }
    return std::move(f_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is_kw(std::string_view kw) const { return peek().kind == Tok::kName && peek().text == kw; }
  bool is_punct(std::string_view p) const { return peek().kind == Tok::kPunct && peek().text == p; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(file_, t.line, t.column, msg);
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::kEnd: return "end of input";
      case Tok::kString: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  void expect_kw(std::string_view kw) {
    if (!is_kw(kw)) fail(peek(), "expected '" + std::string(kw) + "', found " + describe(peek()));
    next();
  }
  const Token& expect_punct(std::string_view p) {
    if (!is_punct(p)) fail(peek(), "expected '" + std::string(p) + "', found " + describe(peek()));
    return next();
  }
  bool accept_punct(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }

  // A name: bare identifier (not a keyword unless `allow_kw`) or quoted string.
  const Token& name(const char* what, bool allow_kw = false) {
    const Token& t = peek();
    if (t.kind == Tok::kString || (t.kind == Tok::kName && (allow_kw || !kKeywords.count(t.text)))) return next();
    fail(t, std::string("expected ") + what + ", found " + describe(t));
  }
  bool at_name() const {
    return peek().kind == Tok::kString || (peek().kind == Tok::kName && !kKeywords.count(peek().text));
  }

  void declare(const Token& t, const char* kind, bool exists) {
    if (exists) fail(t, std::string("duplicate ") + kind + " '" + t.text + "'");
  }

  const ActionSet& actionset_ref(const Token& t) {
    if (auto* a = f_.find_actionset(t.text)) return *a;
    fail(t, "undeclared actionset '" + t.text + "'");
  }
  const Automaton& automaton_ref(const Token& t) {
    if (auto* a = f_.find_automaton(t.text)) return *a;
    fail(t, "undeclared automaton '" + t.text + "'");
  }

  void parse_actionset() {
    next();
    const Token& n = name("actionset name");
    declare(n, "actionset", f_.find_actionset(n.text));
    expect_punct("{");
    std::vector<std::string> actions;
    while (!is_punct("}")) {
      const Token& a = name("action name", true);
      if (a.text == kTauName) fail(a, "'tau' is the implicit trivial action and cannot be declared");
      if (std::find(actions.begin(), actions.end(), a.text) != actions.end())
        fail(a, "duplicate action '" + a.text + "' in actionset '" + n.text + "'");
      actions.push_back(a.text);
    }
    next();
    f_.actionsets.emplace_back(n.text, actions);
  }

  BoundarySignature signature() {
    BoundarySignature sig;
    expect_punct("(");
    auto list = [&] {
      if (!at_name()) return;
      sig.boundaries.push_back(actionset_ref(name("actionset")));
      while (accept_punct(",")) sig.boundaries.push_back(actionset_ref(name("actionset")));
    };
    list();
    if (accept_punct(";")) {
      sig.split = sig.boundaries.size();
      list();
    }
    expect_punct(")");
    return sig;
  }

  void parse_automaton() {
    next();
    const Token& n = name("automaton name");
    declare(n, "automaton", f_.find_automaton(n.text));
    expect_punct(":");
    AutomatonBuilder b(n.text, signature());
    const std::size_t arity = b.raw().signature.size();
    std::set<std::string> states;
    bool have_init = false;
    expect_punct("{");
    while (!is_punct("}")) {
      const Token& kw = peek();
      if (is_kw("states")) {
        next();
        while (at_name()) {
          const Token& s = next();
          if (!states.insert(s.text).second) fail(s, "duplicate state '" + s.text + "' in '" + n.text + "'");
          b.state(s.text);
        }
      } else if (is_kw("init")) {
        next();
        const Token& s = name("state");
        if (have_init) fail(kw, "second 'init' in '" + n.text + "'");
        if (!states.count(s.text)) fail(s, "unknown state '" + s.text + "' in '" + n.text + "'");
        b.initial(s.text);
        have_init = true;
      } else if (is_kw("motion")) {
        next();
        const Token& src = name("source state");
        expect_punct("->");
        const Token& tgt = name("target state");
        for (const Token* s : {&src, &tgt})
          if (!states.count(s->text)) fail(*s, "unknown state '" + s->text + "' in '" + n.text + "'");
        const Token& open = expect_punct("[");
        std::vector<std::string> labels;
        if (!is_punct("]")) {
          labels.push_back(name("action", true).text);
          while (accept_punct(",")) labels.push_back(name("action", true).text);
        }
        expect_punct("]");
        if (labels.size() != arity)
          fail(open, "motion has " + std::to_string(labels.size()) + " labels but '" + n.text + "' has " +
                         std::to_string(arity) + " boundaries");
        std::string mname;
        if (is_kw("as")) {
          next();
          mname = name("motion name").text;
        }
        try {
          b.motion(src.text, tgt.text, labels, mname);
        } catch (const InputError& e) {
          fail(open, e.what());
        }
      } else {
        fail(kw, "expected 'states', 'init', 'motion' or '}', found " + describe(kw));
      }
    }
    next();
    try {
      f_.automata.push_back(b.build());
    } catch (const InputError& e) {
      fail(n, e.what());
    }
  }

  std::size_t port_index(const Token& t) {
    std::string_view s = t.text;
    if (auto at = s.find('@'); at != std::string_view::npos) {
      // Typed form X@i; the type is checked by the caller via `pending_types_`.
      pending_types_.push_back({t, std::string(s.substr(0, at))});
      s = s.substr(at + 1);
    } else {
      pending_types_.push_back({t, {}});
    }
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      fail(t, "expected a boundary index, found " + describe(t));
    return std::stoul(std::string(s));
  }

  std::pair<std::size_t, std::size_t> index_pair() {
    expect_punct("<");
    pending_types_.clear();
    const std::size_t a = port_index(name("boundary index", true));
    expect_punct(",");
    const std::size_t b = port_index(name("boundary index", true));
    expect_punct(">");
    return {a, b};
  }

  void check_types(const BoundarySignature& left, const BoundarySignature& right) {
    const BoundarySignature* sigs[2] = {&left, &right};
    for (std::size_t i = 0; i < pending_types_.size() && i < 2; ++i) {
      const auto& [tok, type] = pending_types_[i];
      if (type.empty()) continue;
      const std::size_t idx = std::stoul(tok.text.substr(tok.text.find('@') + 1));
      if (idx < sigs[i]->size() && (*sigs[i])[idx].name() != type)
        fail(tok, "boundary " + std::to_string(idx) + " has type " + (*sigs[i])[idx].name() + ", not " + type);
    }
  }

  template <class F>
  Design build(const Token& at, F&& f) {
    try {
      return f();
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      fail(at, e.what());
    }
  }

  Design expr() {
    Design left = product_expr();
    while (is_punct(";")) {
      const Token& op = next();
      std::optional<std::pair<std::size_t, std::size_t>> idx;
      std::vector<std::pair<Token, std::string>> types;
      if (is_punct("<")) {
        idx = index_pair();
        types = pending_types_;
      }
      Design right = product_expr();
      if (idx) {
        pending_types_ = types;
        check_types(left.signature(), right.signature());
        left = build(op, [&] { return Design::bind(left, right, idx->first, idx->second); });
      } else {
        left = build(op, [&] { return Design::bind(left, right); });
      }
    }
    return left;
  }

  Design product_expr() {
    Design left = primary();
    while (is_punct("*")) {
      const Token& op = next();
      Design right = primary();
      left = build(op, [&] { return Design::product(left, right); });
    }
    return left;
  }

  Design primary() {
    const Token& t = peek();
    if (accept_punct("(")) {
      Design d = expr();
      expect_punct(")");
      return d;
    }
    if (is_kw("fb")) {
      next();
      auto [j, k] = index_pair();
      auto types = pending_types_;
      expect_punct("(");
      Design d = expr();
      expect_punct(")");
      pending_types_ = types;
      check_types(d.signature(), d.signature());
      return build(t, [&] { return Design::feedback(d, j, k); });
    }
    if (is_kw("op")) {
      next();
      expect_punct("(");
      Design d = expr();
      expect_punct(")");
      return build(t, [&] { return Design::opposite(d); });
    }
    if (is_kw("id") || is_kw("diag")) {
      const bool id = next().text == "id";
      expect_punct("<");
      const ActionSet& x = actionset_ref(name("actionset"));
      expect_punct(">");
      return id ? Design::identity(x) : Design::diagonal(x);
    }
    const Token& n = name("variable, design name or '('");
    if (accept_punct(":")) {
      const Token& a = name("automaton name");
      const Automaton& aut = automaton_ref(a);
      auto it = var_sigs_.find(n.text);
      if (it != var_sigs_.end() && !(it->second == aut.signature()))
        fail(a, "variable '" + n.text + "' used with signatures " + it->second.to_string() + " and " +
                    aut.signature().to_string());
      var_sigs_.emplace(n.text, aut.signature());
      return Design::var(n.text, aut);
    }
    if (auto* d = f_.find_design(n.text)) return *d;
    fail(n, "undeclared design '" + n.text + "' (variables are written name:Automaton)");
  }

  void parse_design() {
    next();
    const Token& n = name("design name");
    declare(n, "design", f_.find_design(n.text));
    expect_punct("=");
    var_sigs_.clear();
    f_.designs.push_back({n.text, expr()});
  }

  void parse_system() {
    next();
    const Token& n = name("system name");
    declare(n, "system", f_.find_system(n.text));
    expect_punct("=");
    var_sigs_.clear();
    Design d = expr();
    std::map<std::string, Automaton> overrides;
    if (is_kw("with")) {
      next();
      expect_punct("{");
      while (!is_punct("}")) {
        const Token& v = name("variable");
        expect_punct("=");
        const Automaton& a = automaton_ref(name("automaton"));
        if (!overrides.emplace(v.text, a).second) fail(v, "variable '" + v.text + "' assigned twice");
      }
      next();
    }
    try {
      f_.systems.emplace_back(n.text, d, overrides);
    } catch (const InputError& e) {
      fail(n, e.what());
    }
  }

  void check_ref(const Token& t) {
    if (f_.find_automaton(t.text) || f_.find_design(t.text) || f_.find_system(t.text)) return;
    fail(t, "'" + t.text + "' is not a declared automaton, design or system");
  }

  void parse_map() {
    const Token& kw = next();
    MapDecl m;
    m.simulation = kw.text == "simulation";
    const Token& n = name("map name");
    declare(n, "comparison or simulation", f_.find_map(n.text));
    m.name = n.text;
    expect_punct(":");
    const Token& src = name("source");
    check_ref(src);
    expect_punct("=>");
    const Token& tgt = name("target");
    check_ref(tgt);
    m.source = src.text;
    m.target = tgt.text;
    if (is_kw("lift")) {
      next();
      m.kind = MapDecl::Kind::kLift;
      expect_punct("{");
      while (!is_punct("}")) {
        const Token& v = name("variable or component");
        expect_punct("=");
        const Token& s = name("simulation");
        const MapDecl* inner = f_.find_map(s.text);
        if (!inner) fail(s, "undeclared simulation '" + s.text + "'");
        m.lifts.emplace_back(v.text, s.text);
      }
      next();
    } else {
      expect_punct("{");
      while (!is_punct("}")) {
        const Token& k = peek();
        const bool state = is_kw("state");
        if (!state && !is_kw("motion")) fail(k, "expected 'state', 'motion' or '}', found " + describe(k));
        next();
        const Token& a = name("name");
        expect_punct("->");
        const Token& b = name("name");
        (state ? m.states : m.motions).emplace_back(a.text, b.text);
      }
      next();
    }
    f_.maps.push_back(std::move(m));
    try {
      (void)f_.comparison(n.text);
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      f_.maps.pop_back();
      fail(n, e.what());
    }
  }

  std::string file_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ModelFile f_;
  std::map<std::string, BoundarySignature> var_sigs_;
  std::vector<std::pair<Token, std::string>> pending_types_;
};

template <class T, class Key>
const T* find_named(const std::vector<T>& v, std::string_view name, Key key) {
  for (const auto& x : v)
    if (key(x) == name) return &x;
  return nullptr;
}

}  // namespace

const ActionSet* ModelFile::find_actionset(std::string_view name) const {
  return find_named(actionsets, name, [](const ActionSet& a) -> const std::string& { return a.name(); });
}
const Automaton* ModelFile::find_automaton(std::string_view name) const {
  return find_named(automata, name, [](const Automaton& a) -> const std::string& { return a.name(); });
}
const Design* ModelFile::find_design(std::string_view name) const {
  auto* d = find_named(designs, name, [](const NamedDesign& d) -> const std::string& { return d.name; });
  return d ? &d->design : nullptr;
}
const System* ModelFile::find_system(std::string_view name) const {
  return find_named(systems, name, [](const System& s) -> const std::string& { return s.name(); });
}
const MapDecl* ModelFile::find_map(std::string_view name) const {
  return find_named(maps, name, [](const MapDecl& m) -> const std::string& { return m.name; });
}

System ModelFile::resolve_system(const std::string& ref) const {
  if (auto* s = find_system(ref)) return *s;
  if (auto* d = find_design(ref)) return System(ref, *d);
  throw InputError("no system or design named '" + ref + "'");
}

Automaton ModelFile::resolve_automaton(const std::string& ref) const {
  if (auto* a = find_automaton(ref)) return *a;
  if (find_system(ref) || find_design(ref)) return evaluate(resolve_system(ref));
  throw InputError("no automaton, design or system named '" + ref + "'");
}

Comparison ModelFile::comparison(const std::string& name) const {
  const MapDecl* m = find_map(name);
  if (!m) throw InputError("no comparison or simulation named '" + name + "'");
  if (m->kind == MapDecl::Kind::kLift) return simulation(name).comparison();
  const Automaton src = resolve_automaton(m->source);
  const Automaton tgt = resolve_automaton(m->target);
  if (src.signature().boundaries != tgt.signature().boundaries)
    throw InputError("'" + name + "': boundaries of " + src.signature().to_string() + " and " +
                     tgt.signature().to_string() + " differ");
  std::vector<StateId> states(src.num_states(), kNone);
  for (const auto& [a, b] : m->states) {
    auto x = src.find_state(a);
    if (!x) throw InputError("'" + name + "': '" + m->source + "' has no state '" + a + "'");
    auto y = tgt.find_state(b);
    if (!y) throw InputError("'" + name + "': '" + m->target + "' has no state '" + b + "'");
    if (states[*x] != kNone && states[*x] != *y)
      throw InputError("'" + name + "': state '" + a + "' mapped twice");
    states[*x] = *y;
  }
  std::map<MotionId, MotionId> fixed;
  for (const auto& [a, b] : m->motions) {
    auto x = src.find_motion(a);
    if (!x) throw InputError("'" + name + "': '" + m->source + "' has no motion '" + a + "'");
    auto y = tgt.find_motion(b);
    if (!y) throw InputError("'" + name + "': '" + m->target + "' has no motion '" + b + "'");
    fixed[*x] = *y;
  }
  Comparison f = infer_comparison(src, tgt, std::move(states), fixed);
  auto violations = verify_comparison(f);
  if (!violations.empty()) {
    std::string msg = "'" + name + "' is not a comparison:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw InputError(msg);
  }
  return f;
}

Simulation ModelFile::simulation(const std::string& name) const {
  const MapDecl* m = find_map(name);
  if (!m) throw InputError("no comparison or simulation named '" + name + "'");
  if (m->kind == MapDecl::Kind::kExplicit) return verify_simulation(comparison(name), "'" + name + "'");
  std::map<std::string, Simulation> given;
  for (const auto& [var, sim] : m->lifts) given.emplace(var, simulation(sim));
  return lift_simulation(resolve_system(m->source), resolve_system(m->target), given);
}

ModelFile parse_model(std::string_view text, const std::string& filename) {
  return Parser(text, filename).run();
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Rendering

std::string quote_name(std::string_view name) {
  const bool bare = !name.empty() && std::all_of(name.begin(), name.end(), ident_char) && !kKeywords.count(name);
  if (bare) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

namespace {

std::string render_signature(const BoundarySignature& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.split && *s.split == i) out += i == 0 ? "; " : " ; ";
    else if (i > 0) out += ", ";
    out += quote_name(s[i].name());
  }
  if (s.split && *s.split == s.size()) out += s.size() == 0 ? ";" : " ;";
  return out + ")";
}

void render_actionset(std::ostream& os, const ActionSet& x) {
  os << "actionset " << quote_name(x.name()) << " {";
  for (std::size_t i = 1; i < x.size(); ++i) os << ' ' << quote_name(x.action_name(static_cast<ActionId>(i)));
  os << " }\n";
}

void render_automaton(std::ostream& os, const Automaton& a, const std::string& name = {}) {
  os << "automaton " << quote_name(name.empty() ? a.name() : name) << " : " << render_signature(a.signature()) << " {\n  states";
  for (StateId v = 0; v < a.num_states(); ++v) os << ' ' << quote_name(a.state_name(v));
  os << '\n';
  if (auto i = a.initial()) os << "  init " << quote_name(a.state_name(*i)) << '\n';
  std::size_t k = 0;
  for (MotionId m = 0; m < a.num_motions(); ++m) {
    if (a.is_reflexive(m)) continue;
    os << "  motion " << quote_name(a.state_name(a.source(m))) << " -> " << quote_name(a.state_name(a.target(m)))
       << " [";
    for (std::size_t b = 0; b < a.arity(); ++b)
      os << (b ? ", " : "") << (a.label(m, b) == kTau ? std::string(kTauName) : quote_name(a.signature()[b].action_name(a.label(m, b))));
    os << ']';
    const std::string name = a.motion_name(m);
    if (name != "m" + std::to_string(k)) os << " as " << quote_name(name);
    ++k;
    os << '\n';
  }
  os << "}\n";
}

void render_pairs(std::ostream& os, const char* kw, const std::vector<std::pair<std::string, std::string>>& v) {
  for (const auto& [a, b] : v) os << "  " << kw << ' ' << quote_name(a) << " -> " << quote_name(b) << '\n';
}

}  // namespace

std::string render_model(const ModelFile& f) {
  std::ostringstream os;
  for (const auto& x : f.actionsets) render_actionset(os, x);
  for (const auto& a : f.automata) {
    os << '\n';
    render_automaton(os, a);
  }
  if (!f.designs.empty()) os << '\n';
  for (const auto& d : f.designs) os << "design " << quote_name(d.name) << " = " << d.design.to_string() << '\n';
  if (!f.systems.empty()) os << '\n';
  for (const auto& s : f.systems) {
    os << "system " << quote_name(s.name()) << " = " << s.design().to_string();
    if (!s.overrides().empty()) {
      os << " with {";
      for (const auto& [v, a] : s.overrides()) os << ' ' << quote_name(v) << " = " << quote_name(a.name());
      os << " }";
    }
    os << '\n';
  }
  for (const auto& m : f.maps) {
    os << '\n'
       << (m.simulation ? "simulation " : "comparison ") << quote_name(m.name) << " : " << quote_name(m.source)
       << " => " << quote_name(m.target);
    if (m.kind == MapDecl::Kind::kLift) {
      os << " lift {";
      for (const auto& [v, s] : m.lifts) os << ' ' << quote_name(v) << " = " << quote_name(s);
      os << " }\n";
    } else {
      os << " {\n";
      render_pairs(os, "state", m.states);
      render_pairs(os, "motion", m.motions);
      os << "}\n";
    }
  }
  return os.str();
}

std::string render_automaton_file(const Automaton& a, const std::string& name) {
  std::ostringstream os;
  std::vector<std::string> seen;
  for (const auto& x : a.signature().boundaries) {
    if (std::find(seen.begin(), seen.end(), x.name()) != seen.end()) continue;
    seen.push_back(x.name());
    render_actionset(os, x);
  }
  os << '\n';
  render_automaton(os, a, name);
  return os.str();
}

}  // namespace awb
