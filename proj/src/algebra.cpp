#include "awb/algebra.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "awb/error.hpp"

namespace awb {

using detail::AutomatonData;
using detail::Origin;

namespace {

// Side of each boundary (true = left), when the signature has a split.
std::optional<std::vector<bool>> sides(const BoundarySignature& s) {
  if (!s.split) return std::nullopt;
  std::vector<bool> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = i < *s.split;
  return out;
}

std::optional<std::size_t> split_from_sides(const std::optional<std::vector<bool>>& side) {
  if (!side) return std::nullopt;
  std::size_t lefts = std::count(side->begin(), side->end(), true);
  for (std::size_t i = 0; i < side->size(); ++i)
    if ((*side)[i] != (i < lefts)) return std::nullopt;
  return lefts;
}

void check_index(const BoundarySignature& s, std::size_t i, const char* op) {
  if (i >= s.size())
    throw InputError(std::string(op) + ": boundary " + std::to_string(i) + " out of range for signature " +
                     s.to_string());
}

void check_glue(const ActionSet& a, const ActionSet& b, const char* op, std::size_t j, std::size_t k) {
  if (!(a == b))
    throw InputError(std::string(op) + ": boundary " + std::to_string(j) + " has type " + a.name() +
                     " but boundary " + std::to_string(k) + " has type " + b.name());
}

}  // namespace

BoundarySignature bind_signature(const BoundarySignature& s, const BoundarySignature& t, std::size_t j,
                                 std::size_t k) {
  check_index(s, j, "bind");
  check_index(t, k, "bind");
  check_glue(s[j], t[k], "bind", j, k);
  BoundarySignature out;
  auto ss = sides(s), ts = sides(t);
  std::optional<std::vector<bool>> side;
  if (ss && ts) side.emplace();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == j) continue;
    out.boundaries.push_back(s[i]);
    if (side) side->push_back((*ss)[i]);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i == k) continue;
    out.boundaries.push_back(t[i]);
    if (side) side->push_back((*ts)[i]);
  }
  out.split = split_from_sides(side);
  return out;
}

BoundarySignature feedback_signature(const BoundarySignature& s, std::size_t j, std::size_t k) {
  check_index(s, j, "feedback");
  check_index(s, k, "feedback");
  if (j == k) throw InputError("feedback: boundaries must be distinct");
  check_glue(s[j], s[k], "feedback", j, k);
  BoundarySignature out;
  auto ss = sides(s);
  std::optional<std::vector<bool>> side;
  if (ss) side.emplace();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == j || i == k) continue;
    out.boundaries.push_back(s[i]);
    if (side) side->push_back((*ss)[i]);
  }
  out.split = split_from_sides(side);
  return out;
}

BoundarySignature product_signature(const BoundarySignature& s, const BoundarySignature& t) {
  BoundarySignature out;
  out.boundaries = s.boundaries;
  out.boundaries.insert(out.boundaries.end(), t.boundaries.begin(), t.boundaries.end());
  auto ss = sides(s), ts = sides(t);
  std::optional<std::vector<bool>> side;
  if (ss && ts) {
    side = *ss;
    side->insert(side->end(), ts->begin(), ts->end());
  }
  out.split = split_from_sides(side);
  return out;
}

BoundarySignature permute_signature(const BoundarySignature& s, const std::vector<std::size_t>& perm,
                                    std::optional<std::size_t> split) {
  if (perm.size() != s.size()) throw InputError("permute: permutation has wrong length");
  std::vector<char> seen(s.size(), 0);
  BoundarySignature out;
  auto ss = sides(s);
  std::optional<std::vector<bool>> side;
  if (ss) side.emplace();
  for (std::size_t p : perm) {
    if (p >= s.size() || seen[p]) throw InputError("permute: not a permutation");
    seen[p] = 1;
    out.boundaries.push_back(s[p]);
    if (side) side->push_back((*ss)[p]);
  }
  if (split) {
    if (*split > out.size()) throw InputError("permute: split out of range");
    out.split = split;
  } else {
    out.split = split_from_sides(side);
  }
  return out;
}

std::vector<std::size_t> opposite_permutation(const BoundarySignature& s) {
  if (!s.split) throw InputError("opposite: signature " + s.to_string() + " has no left/right split");
  std::vector<std::size_t> perm;
  for (std::size_t i = *s.split; i < s.size(); ++i) perm.push_back(i);
  for (std::size_t i = 0; i < *s.split; ++i) perm.push_back(i);
  return perm;
}

BoundarySignature opposite_signature(const BoundarySignature& s) {
  return permute_signature(s, opposite_permutation(s), s.size() - *s.split);
}

// ---------------------------------------------------------------------------

Automaton bind(const Automaton& s, const Automaton& t, std::size_t j, std::size_t k) {
  auto d = std::make_shared<AutomatonData>();
  d->signature = bind_signature(s.signature(), t.signature(), j, k);
  d->name = "(" + s.name() + " ; " + t.name() + ")";
  d->origin = Origin::kBind;
  d->operands = {s, t};
  d->leaf_count = s.leaf_count() + t.leaf_count();
  d->glue_left = j;
  d->glue_right = k;

  const StateId ns = s.num_states(), nt = t.num_states();
  if (static_cast<std::uint64_t>(ns) * nt >= kNone) throw InputError("bind: too many states");
  d->num_states = ns * nt;

  // Motions of t bucketed by (source, label on k).
  const std::size_t alpha = t.signature()[k].size();
  std::vector<MotionId> bucket_begin(static_cast<std::size_t>(nt) * alpha + 1, 0);
  for (MotionId f = 0; f < t.num_motions(); ++f)
    ++bucket_begin[static_cast<std::size_t>(t.source(f)) * alpha + t.label(f, k) + 1];
  std::partial_sum(bucket_begin.begin(), bucket_begin.end(), bucket_begin.begin());
  std::vector<MotionId> bucket(t.num_motions());
  {
    auto fill = bucket_begin;
    for (MotionId f = 0; f < t.num_motions(); ++f)
      bucket[fill[static_cast<std::size_t>(t.source(f)) * alpha + t.label(f, k)]++] = f;
  }

  std::uint64_t count = 0;
  for (StateId v = 0; v < ns; ++v)
    for (StateId w = 0; w < nt; ++w)
      for (MotionId e : s.out(v)) {
        const std::size_t b = static_cast<std::size_t>(w) * alpha + s.label(e, j);
        count += bucket_begin[b + 1] - bucket_begin[b];
      }
  if (count >= kNone) throw InputError("bind: too many motions");

  const std::size_t as = s.arity(), at = t.arity(), arity = d->arity();
  d->source.reserve(count);
  d->target.reserve(count);
  d->tag_left.reserve(count);
  d->tag_right.reserve(count);
  d->labels.reserve(count * arity);
  d->reflexive_of.assign(d->num_states, kNone);

  for (StateId v = 0; v < ns; ++v) {
    const MotionId rv = s.reflexive_of(v);
    for (StateId w = 0; w < nt; ++w) {
      const MotionId rw = t.reflexive_of(w);
      const StateId src = v * nt + w;
      for (MotionId e : s.out(v)) {
        const std::size_t b = static_cast<std::size_t>(w) * alpha + s.label(e, j);
        const auto le = s.labels(e);
        for (MotionId i = bucket_begin[b]; i < bucket_begin[b + 1]; ++i) {
          const MotionId f = bucket[i];
          if (e == rv && f == rw) d->reflexive_of[src] = static_cast<MotionId>(d->source.size());
          d->source.push_back(src);
          d->target.push_back(s.target(e) * nt + t.target(f));
          d->tag_left.push_back(e);
          d->tag_right.push_back(f);
          for (std::size_t x = 0; x < as; ++x)
            if (x != j) d->labels.push_back(le[x]);
          const auto lf = t.labels(f);
          for (std::size_t x = 0; x < at; ++x)
            if (x != k) d->labels.push_back(lf[x]);
        }
      }
    }
  }
  if (s.initial() && t.initial()) d->initial = *s.initial() * nt + *t.initial();
  d->index_by_source();
  return Automaton(std::move(d));
}

Automaton bind(const Automaton& s, const Automaton& t) {
  if (s.arity() == 0 || t.arity() == 0) throw InputError("bind: both operands need a boundary");
  return bind(s, t, s.arity() - 1, 0);
}

Automaton feedback(const Automaton& s, std::size_t j, std::size_t k) {
  auto d = std::make_shared<AutomatonData>();
  d->signature = feedback_signature(s.signature(), j, k);
  d->name = "fb(" + s.name() + ")";
  d->origin = Origin::kFeedback;
  d->operands = {s};
  d->leaf_count = s.leaf_count();
  d->glue_left = j;
  d->glue_right = k;
  d->num_states = s.num_states();
  d->initial = s.initial();

  const std::size_t as = s.arity();
  MotionId count = 0;
  for (MotionId m = 0; m < s.num_motions(); ++m) count += s.label(m, j) == s.label(m, k);
  d->source.reserve(count);
  d->target.reserve(count);
  d->tag_left.reserve(count);
  d->labels.reserve(static_cast<std::size_t>(count) * d->arity());
  d->reflexive_of.assign(d->num_states, kNone);
  for (MotionId m = 0; m < s.num_motions(); ++m) {
    if (s.label(m, j) != s.label(m, k)) continue;
    if (s.is_reflexive(m)) d->reflexive_of[s.source(m)] = static_cast<MotionId>(d->source.size());
    d->source.push_back(s.source(m));
    d->target.push_back(s.target(m));
    d->tag_left.push_back(m);
    const auto l = s.labels(m);
    for (std::size_t x = 0; x < as; ++x)
      if (x != j && x != k) d->labels.push_back(l[x]);
  }
  d->index_by_source();
  return Automaton(std::move(d));
}

Automaton product(const Automaton& s, const Automaton& t) {
  auto d = std::make_shared<AutomatonData>();
  d->signature = product_signature(s.signature(), t.signature());
  d->name = "(" + s.name() + " * " + t.name() + ")";
  d->origin = Origin::kProduct;
  d->operands = {s, t};
  d->leaf_count = s.leaf_count() + t.leaf_count();

  const StateId ns = s.num_states(), nt = t.num_states();
  if (static_cast<std::uint64_t>(ns) * nt >= kNone) throw InputError("product: too many states");
  const std::uint64_t count = static_cast<std::uint64_t>(s.num_motions()) * t.num_motions();
  if (count >= kNone) throw InputError("product: too many motions");
  d->num_states = ns * nt;
  d->source.reserve(count);
  d->target.reserve(count);
  d->tag_left.reserve(count);
  d->tag_right.reserve(count);
  d->labels.reserve(count * d->arity());
  d->reflexive_of.assign(d->num_states, kNone);
  for (StateId v = 0; v < ns; ++v)
    for (StateId w = 0; w < nt; ++w) {
      const StateId src = v * nt + w;
      for (MotionId e : s.out(v))
        for (MotionId f : t.out(w)) {
          if (e == s.reflexive_of(v) && f == t.reflexive_of(w))
            d->reflexive_of[src] = static_cast<MotionId>(d->source.size());
          d->source.push_back(src);
          d->target.push_back(s.target(e) * nt + t.target(f));
          d->tag_left.push_back(e);
          d->tag_right.push_back(f);
          const auto le = s.labels(e), lf = t.labels(f);
          d->labels.insert(d->labels.end(), le.begin(), le.end());
          d->labels.insert(d->labels.end(), lf.begin(), lf.end());
        }
    }
  if (s.initial() && t.initial()) d->initial = *s.initial() * nt + *t.initial();
  d->index_by_source();
  return Automaton(std::move(d));
}

namespace {

Automaton permute_named(const Automaton& s, const std::vector<std::size_t>& perm, std::optional<std::size_t> split,
                        std::string name) {
  auto d = std::make_shared<AutomatonData>();
  d->signature = permute_signature(s.signature(), perm, split);
  d->name = std::move(name);
  d->origin = Origin::kPermute;
  d->operands = {s};
  d->leaf_count = s.leaf_count();
  d->permutation = perm;
  const auto& sd = s.data();
  d->num_states = sd.num_states;
  d->source = sd.source;
  d->target = sd.target;
  d->out_begin = sd.out_begin;
  d->reflexive_of = sd.reflexive_of;
  d->initial = sd.initial;
  d->labels.resize(sd.labels.size());
  const std::size_t n = perm.size();
  for (MotionId m = 0; m < sd.num_motions(); ++m)
    for (std::size_t i = 0; i < n; ++i) d->labels[m * n + i] = sd.labels[m * n + perm[i]];
  return Automaton(std::move(d));
}

}  // namespace

Automaton permute(const Automaton& s, const std::vector<std::size_t>& perm, std::optional<std::size_t> split) {
  return permute_named(s, perm, split, s.name());
}

Automaton opposite(const Automaton& s) {
  const auto& sig = s.signature();
  return permute_named(s, opposite_permutation(sig), sig.size() - *sig.split, "op(" + s.name() + ")");
}

Automaton bind_multi(const Automaton& s, const Automaton& t,
                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (pairs.empty()) throw InputError("bind_multi: no boundary pairs");
  auto [j0, k0] = pairs[0];
  Automaton out = bind(s, t, j0, k0);
  // Positions of the remaining boundaries of s and t in `out`, tracked
  // through successive feedbacks.
  std::vector<std::size_t> pos_s(s.arity(), kNone), pos_t(t.arity(), kNone);
  std::size_t at = 0;
  for (std::size_t i = 0; i < s.arity(); ++i)
    if (i != j0) pos_s[i] = at++;
  for (std::size_t i = 0; i < t.arity(); ++i)
    if (i != k0) pos_t[i] = at++;
  for (std::size_t p = 1; p < pairs.size(); ++p) {
    auto [j, k] = pairs[p];
    if (j >= s.arity() || k >= t.arity() || pos_s[j] == kNone || pos_t[k] == kNone)
      throw InputError("bind_multi: boundary pair used twice or out of range");
    const std::size_t a = pos_s[j], b = pos_t[k];
    out = feedback(out, a, b);
    for (auto* v : {&pos_s, &pos_t})
      for (auto& x : *v) {
        if (x == kNone) continue;
        if (x == a || x == b) x = kNone;
        else x -= (x > a) + (x > b);
      }
  }
  return out;
}

namespace {

Automaton constant_automaton(const std::string& name, const ActionSet& x, std::size_t ports) {
  auto d = std::make_shared<AutomatonData>();
  d->name = name + "<" + x.name() + ">";
  d->signature.boundaries.assign(ports, x);
  d->signature.split = 1;
  d->num_states = 1;
  d->state_names = {"0"};
  d->state_index.emplace("0", 0);
  d->initial = 0;
  for (ActionId a = 0; a < x.size(); ++a) {
    d->source.push_back(0);
    d->target.push_back(0);
    d->labels.insert(d->labels.end(), ports, a);
    std::string mname = a == kTau ? "@0" : x.action_name(a);
    d->motion_index.emplace(mname, a);
    d->motion_names.push_back(std::move(mname));
  }
  d->reflexive_of = {0};
  d->index_by_source();
  return Automaton(std::move(d));
}

}  // namespace

Automaton identity_automaton(const ActionSet& x) { return constant_automaton("id", x, 2); }
Automaton diagonal_automaton(const ActionSet& x) { return constant_automaton("diag", x, 3); }

Automaton unit_automaton() {
  auto d = std::make_shared<AutomatonData>();
  d->name = "unit";
  d->num_states = 1;
  d->state_names = {"0"};
  d->state_index.emplace("0", 0);
  d->motion_names = {"@0"};
  d->motion_index.emplace("@0", 0);
  d->initial = 0;
  d->source = {0};
  d->target = {0};
  d->reflexive_of = {0};
  d->index_by_source();
  return Automaton(std::move(d));
}

// ---------------------------------------------------------------------------
// Isomorphism

bool check_isomorphism(const Automaton& s, const Automaton& t, const Isomorphism& iso) {
  if (s.num_states() != t.num_states() || s.num_motions() != t.num_motions()) return false;
  if (iso.states.size() != s.num_states() || iso.motions.size() != s.num_motions()) return false;
  if (s.arity() != t.arity()) return false;
  std::vector<char> hit_s(t.num_states(), 0), hit_m(t.num_motions(), 0);
  for (StateId v = 0; v < s.num_states(); ++v) {
    const StateId w = iso.states[v];
    if (w >= t.num_states() || hit_s[w]) return false;
    hit_s[w] = 1;
    if (iso.motions[s.reflexive_of(v)] != t.reflexive_of(w)) return false;
  }
  for (MotionId m = 0; m < s.num_motions(); ++m) {
    const MotionId n = iso.motions[m];
    if (n >= t.num_motions() || hit_m[n]) return false;
    hit_m[n] = 1;
    if (t.source(n) != iso.states[s.source(m)] || t.target(n) != iso.states[s.target(m)]) return false;
    for (std::size_t i = 0; i < s.arity(); ++i)
      if (s.label(m, i) != t.label(n, i)) return false;
  }
  if (s.initial().has_value() != t.initial().has_value()) return false;
  if (s.initial() && iso.states[*s.initial()] != *t.initial()) return false;
  return true;
}

namespace {

// Candidate bijection from matching provenance leaves by identity.
std::optional<Isomorphism> by_provenance(const Automaton& s, const Automaton& t) {
  if (s.leaf_count() != t.leaf_count() || s.leaf_count() == 1) return std::nullopt;
  if (s.num_states() != t.num_states() || s.num_motions() != t.num_motions()) return std::nullopt;
  auto ls = s.leaves(), lt = t.leaves();
  std::vector<std::size_t> perm(ls.size());
  std::vector<char> used(lt.size(), 0);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    std::size_t k = 0;
    while (k < lt.size() && (used[k] || !ls[i].same_object(lt[k]))) ++k;
    if (k == lt.size()) return std::nullopt;
    used[k] = 1;
    perm[i] = k;
  }
  Isomorphism iso;
  iso.states.resize(s.num_states());
  iso.motions.resize(s.num_motions());
  std::vector<StateId> ts(lt.size());
  for (StateId v = 0; v < s.num_states(); ++v) {
    auto tuple = s.leaf_states(v);
    for (std::size_t i = 0; i < tuple.size(); ++i) ts[perm[i]] = tuple[i];
    auto w = t.state_from_leaves(ts);
    if (!w) return std::nullopt;
    iso.states[v] = *w;
  }
  std::vector<MotionId> tm(lt.size());
  for (MotionId m = 0; m < s.num_motions(); ++m) {
    auto tuple = s.leaf_motions(m);
    for (std::size_t i = 0; i < tuple.size(); ++i) tm[perm[i]] = tuple[i];
    auto n = t.motion_from_leaves(tm);
    if (!n) return std::nullopt;
    iso.motions[m] = *n;
  }
  return iso;
}

struct Search {
  const Automaton& s;
  const Automaton& t;
  // Multiset key of a motion: (other endpoint, reflexive flag, labels).
  using Key = std::vector<std::uint32_t>;
  std::vector<std::vector<Key>> sig_s, sig_t;  // per-state invariant
  std::vector<StateId> map, inv;
  std::vector<StateId> order;
  std::size_t budget = 2'000'000;

  Search(const Automaton& a, const Automaton& b) : s(a), t(b) {
    sig_s = invariants(s);
    sig_t = invariants(t);
    map.assign(s.num_states(), kNone);
    inv.assign(t.num_states(), kNone);
  }

  static std::vector<std::vector<Key>> invariants(const Automaton& a) {
    std::vector<std::vector<Key>> out(a.num_states());
    for (MotionId m = 0; m < a.num_motions(); ++m) {
      const bool loop = a.source(m) == a.target(m);
      Key k{0, loop, a.is_reflexive(m)};
      for (ActionId l : a.labels(m)) k.push_back(l);
      out[a.source(m)].push_back(k);
      k[0] = 1;
      out[a.target(m)].push_back(k);
    }
    for (StateId v = 0; v < a.num_states(); ++v) {
      if (a.initial() == v) out[v].push_back({2});
      std::sort(out[v].begin(), out[v].end());
    }
    return out;
  }

  // Multiset of motion keys between two states, in one direction.
  std::vector<Key> edges(const Automaton& a, StateId x, StateId y) const {
    std::vector<Key> out;
    for (MotionId m : a.out(x)) {
      if (a.target(m) != y) continue;
      Key k{a.is_reflexive(m)};
      for (ActionId l : a.labels(m)) k.push_back(l);
      out.push_back(std::move(k));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool consistent(StateId v, StateId w) const {
    if (sig_s[v] != sig_t[w]) return false;
    for (StateId u = 0; u < s.num_states(); ++u) {
      if (map[u] == kNone && u != v) continue;
      const StateId x = u == v ? w : map[u];
      if (edges(s, v, u) != edges(t, w, x)) return false;
      if (edges(s, u, v) != edges(t, x, w)) return false;
    }
    return true;
  }

  bool run(std::size_t depth) {
    if (depth == order.size()) return true;
    if (budget == 0) return false;
    --budget;
    const StateId v = order[depth];
    for (StateId w = 0; w < t.num_states(); ++w) {
      if (inv[w] != kNone || !consistent(v, w)) continue;
      map[v] = w;
      inv[w] = v;
      if (run(depth + 1)) return true;
      map[v] = kNone;
      inv[w] = kNone;
    }
    return false;
  }
};

std::optional<Isomorphism> by_search(const Automaton& s, const Automaton& t) {
  if (s.num_states() != t.num_states() || s.num_motions() != t.num_motions()) return std::nullopt;
  Search search(s, t);
  {
    auto a = search.sig_s, b = search.sig_t;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return std::nullopt;
  }
  // Visit states in BFS order over the undirected graph so that each new
  // state is adjacent to an already mapped one.
  std::vector<char> seen(s.num_states(), 0);
  std::vector<std::vector<StateId>> adj(s.num_states());
  for (MotionId m = 0; m < s.num_motions(); ++m) {
    adj[s.source(m)].push_back(s.target(m));
    adj[s.target(m)].push_back(s.source(m));
  }
  for (StateId root = 0; root < s.num_states(); ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::size_t head = search.order.size();
    search.order.push_back(root);
    while (head < search.order.size()) {
      StateId v = search.order[head++];
      for (StateId w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          search.order.push_back(w);
        }
    }
  }
  if (!search.run(0)) return std::nullopt;

  Isomorphism iso;
  iso.states = search.map;
  iso.motions.assign(s.num_motions(), kNone);
  std::vector<char> used(t.num_motions(), 0);
  for (MotionId m = 0; m < s.num_motions(); ++m) {
    const StateId w = iso.states[s.source(m)], x = iso.states[s.target(m)];
    for (MotionId n : t.out(w)) {
      if (used[n] || t.target(n) != x || t.is_reflexive(n) != s.is_reflexive(m)) continue;
      bool same = true;
      for (std::size_t i = 0; i < s.arity() && same; ++i) same = s.label(m, i) == t.label(n, i);
      if (!same) continue;
      used[n] = 1;
      iso.motions[m] = n;
      break;
    }
    if (iso.motions[m] == kNone) return std::nullopt;
  }
  return iso;
}

}  // namespace

std::optional<Isomorphism> isomorphic(const Automaton& s, const Automaton& t) {
  if (s.signature().boundaries != t.signature().boundaries)
    throw InputError("isomorphic: signatures differ: " + s.signature().to_string() + " vs " +
                     t.signature().to_string());
  if (auto iso = by_provenance(s, t); iso && check_isomorphism(s, t, *iso)) return iso;
  if (auto iso = by_search(s, t); iso && check_isomorphism(s, t, *iso)) return iso;
  return std::nullopt;
}

}  // namespace awb
