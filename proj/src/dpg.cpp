#include "pqk/dpg.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "pqk/error.hpp"

namespace pqk::dpg {

EdgeWord EdgeWord::inverse() const {
  EdgeWord out{id, {}};
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) out.letters.push_back(Letter{it->atom, -it->sign});
  return out;
}

std::vector<std::string> Graph::atoms() const {
  std::vector<std::string> out;
  for (const auto& e : edges)
    for (const auto& l : e.letters) out.push_back(l.atom);
  return out;
}

Rational holonomy(const EdgeWord& e, const TestConnection& A) {
  Rational v = 0;
  for (const auto& l : e.letters) {
    auto it = A.values.find(l.atom);
    if (it != A.values.end()) v += l.sign * it->second;
  }
  return v;
}

TestConnection witness_connection(const Graph& g, const std::vector<Rational>& targets) {
  if (targets.size() != g.edges.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(targets.size()) + " targets for " +
                                                  std::to_string(g.edges.size()) + " edges");
  }
  TestConnection A;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Letter& first = g.edges[i].letters.front();
    A.values[first.atom] = first.sign * targets[i];
  }
  return A;
}

Rational epsilon(const Face& S, const EdgeWord& e) {
  Rational v = 0;
  for (const auto& l : e.letters) {
    auto it = S.incidence.find(l.atom);
    if (it != S.incidence.end()) v += l.sign * it->second;
  }
  return v;
}

MomentumOperator flux_operator(const Face& S, const Graph& g) {
  MomentumOperator op{S.id, {}};
  for (const auto& e : g.edges) op.action.emplace(DofId{e.id}, epsilon(S, e));
  return op;
}

namespace {

struct Position {
  std::size_t edge;
  std::size_t index;
};

std::map<std::string, Position> positions(const Graph& g) {
  std::map<std::string, Position> out;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    for (std::size_t i = 0; i < g.edges[e].letters.size(); ++i) out[g.edges[e].letters[i].atom] = {e, i};
  return out;
}

std::string word_name(const std::vector<Letter>& letters) {
  std::string out = "e(";
  for (std::size_t i = 0; i < letters.size(); ++i) {
    out += (i ? "," : "") + std::string(letters[i].sign < 0 ? "-" : "") + letters[i].atom;
  }
  return out + ")";
}

EdgeWord canonical_piece(std::vector<Letter> letters) {
  auto smallest = std::min_element(letters.begin(), letters.end(),
                                   [](const Letter& x, const Letter& y) { return x.atom < y.atom; });
  EdgeWord e{{}, std::move(letters)};
  if (smallest->sign < 0) e = e.inverse();
  e.id = word_name(e.letters);
  return e;
}

}  // namespace

GraphOrder graph_geq(const Graph& upper, const Graph& lower) {
  GraphOrder out;
  const auto where = positions(upper);
  for (const auto& e : lower.edges) {
    std::vector<std::pair<std::string, int>> factors;
    bool ok = true;
    std::size_t i = 0;
    while (ok && i < e.letters.size()) {
      auto it = where.find(e.letters[i].atom);
      if (it == where.end()) {
        ok = false;
        break;
      }
      const EdgeWord& piece = upper.edges[it->second.edge];
      const std::size_t len = piece.letters.size();
      const bool forward = it->second.index == 0 && piece.letters.front().sign == e.letters[i].sign;
      const bool backward = it->second.index == len - 1 && piece.letters.back().sign == -e.letters[i].sign;
      const EdgeWord word = forward ? piece : piece.inverse();
      if ((!forward && !backward) || i + len > e.letters.size() ||
          !std::equal(word.letters.begin(), word.letters.end(), e.letters.begin() + static_cast<std::ptrdiff_t>(i))) {
        ok = false;
        break;
      }
      factors.emplace_back(piece.id, forward ? 1 : -1);
      i += len;
    }
    if (!ok) {
      out.refused_edge = e.id;
      out.factorization.clear();
      return out;
    }
    out.factorization.push_back(std::move(factors));
  }
  out.accepted = true;
  return out;
}

Graph graph_join(const Graph& a, const Graph& b) {
  const auto in_a = positions(a);
  const auto in_b = positions(b);

  // x, y consecutive in some word; do they also appear consecutively, with
  // matching orientation, in `other` (or both outside it)?
  auto mirrored = [](const Graph& other, const std::map<std::string, Position>& where, const Letter& x,
                     const Letter& y) {
    auto ix = where.find(x.atom);
    auto iy = where.find(y.atom);
    if (ix == where.end() || iy == where.end()) return ix == where.end() && iy == where.end();
    if (ix->second.edge != iy->second.edge) return false;
    const auto& w = other.edges[ix->second.edge].letters;
    const Letter& ox = w[ix->second.index];
    const Letter& oy = w[iy->second.index];
    if (iy->second.index == ix->second.index + 1) return ox.sign == x.sign && oy.sign == y.sign;
    if (ix->second.index == iy->second.index + 1) return ox.sign == -x.sign && oy.sign == -y.sign;
    return false;
  };

  std::vector<std::vector<Letter>> pieces;
  auto cut = [&](const Graph& g, const Graph& other, const std::map<std::string, Position>& where, bool skip_shared) {
    for (const auto& e : g.edges) {
      std::vector<Letter> run;
      auto flush = [&] {
        if (!run.empty() && !(skip_shared && where.count(run.front().atom))) pieces.push_back(run);
        run.clear();
      };
      for (std::size_t i = 0; i < e.letters.size(); ++i) {
        if (i > 0 && !mirrored(other, where, e.letters[i - 1], e.letters[i])) flush();
        run.push_back(e.letters[i]);
      }
      flush();
    }
  };
  cut(a, b, in_b, false);
  cut(b, a, in_a, true);

  Graph out;
  for (auto& letters : pieces) {
    EdgeWord piece{{}, letters};
    std::optional<EdgeWord> existing;
    for (const Graph* g : {&a, &b}) {
      for (const auto& e : g->edges) {
        if (e.same_word(piece) || e.inverse().same_word(piece)) {
          existing = e;
          break;
        }
      }
      if (existing) break;
    }
    out.edges.push_back(existing ? *existing : canonical_piece(std::move(letters)));
  }
  return out;
}

std::vector<Face> dual_flux_basis(const Graph& g) {
  std::vector<Face> out;
  for (const auto& e : g.edges) {
    const Letter& first = e.letters.front();
    out.push_back(Face{"S*" + e.id, {{first.atom, Rational(first.sign)}}});
  }
  return out;
}

DofId atom_dof(const std::string& atom) { return DofId{"atom:" + atom}; }

// ---------------------------------------------------------------------------

namespace {

template <typename T>
const T& find_by_id(const std::vector<T>& items, const std::string& id, const char* what) {
  for (const auto& item : items)
    if (item.id == id) return item;
  throw Error(ErrorCode::MalformedInput, std::string("unknown ") + what + " '" + id + "'");
}

template <typename T>
bool has_id(const std::vector<T>& items, const std::string& id) {
  return std::any_of(items.begin(), items.end(), [&](const T& item) { return item.id == id; });
}

}  // namespace

const AtomicEdge& System::atom(const std::string& id) const { return find_by_id(atoms, id, "atomic edge"); }
const EdgeWord& System::edge(const std::string& id) const { return find_by_id(edges, id, "edge"); }
const Face& System::face(const std::string& id) const { return find_by_id(faces, id, "face"); }
const Label& System::label(const std::string& id) const { return find_by_id(labels, id, "label"); }
bool System::has_edge(const std::string& id) const { return has_id(edges, id); }
bool System::has_face(const std::string& id) const { return has_id(faces, id); }
bool System::has_label(const std::string& id) const { return has_id(labels, id); }

Graph System::graph(const Label& l) const {
  Graph g;
  for (const auto& id : l.graph) g.edges.push_back(edge(id));
  return g;
}

std::vector<std::string> System::atom_ids() const {
  std::vector<std::string> out;
  for (const auto& a : atoms) out.push_back(a.id);
  return out;
}

std::string System::intern_edge(const EdgeWord& e) {
  const EdgeWord inv = e.inverse();
  for (const auto& existing : edges)
    if (existing.same_word(e) || existing.same_word(inv)) return existing.id;
  EdgeWord added = e;
  while (has_edge(added.id)) added.id += "'";
  edges.push_back(added);
  return added.id;
}

void System::intern_face(const Face& f) {
  if (!has_face(f.id)) faces.push_back(f);
}

void System::validate() const {
  std::set<std::string> ids;
  for (const auto& a : atoms) {
    if (a.id.empty() || !ids.insert(a.id).second) throw Error(ErrorCode::MalformedInput, "atomic_edges: duplicate or empty id '" + a.id + "'");
    if (a.source == a.target && !a.loop) {
      throw Error(ErrorCode::MalformedInput, "atomic_edges." + a.id + ": source equals target but not flagged as loop");
    }
  }
  std::set<std::string> edge_ids;
  for (const auto& e : edges) {
    if (e.id.empty() || !edge_ids.insert(e.id).second || e.id.rfind("atom:", 0) == 0) {
      throw Error(ErrorCode::MalformedInput, "edges: duplicate or reserved id '" + e.id + "'");
    }
    if (e.letters.empty()) throw Error(ErrorCode::MalformedInput, "edges." + e.id + ": empty word");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < e.letters.size(); ++i) {
      const Letter& l = e.letters[i];
      if (!ids.count(l.atom)) throw Error(ErrorCode::MalformedInput, "edges." + e.id + ": unknown atom '" + l.atom + "'");
      if (l.sign != 1 && l.sign != -1) throw Error(ErrorCode::MalformedInput, "edges." + e.id + ": sign must be ±1");
      if (!seen.insert(l.atom).second) {
        throw Error(ErrorCode::MalformedInput, "edges." + e.id + ": atom '" + l.atom + "' repeated");
      }
      if (i > 0) {
        const AtomicEdge& prev = atom(e.letters[i - 1].atom);
        const AtomicEdge& cur = atom(l.atom);
        const std::string& end = e.letters[i - 1].sign > 0 ? prev.target : prev.source;
        const std::string& start = l.sign > 0 ? cur.source : cur.target;
        if (end != start) throw Error(ErrorCode::MalformedInput, "edges." + e.id + ": letters are not composable");
      }
    }
  }
  std::set<std::string> face_ids;
  for (const auto& f : faces) {
    if (f.id.empty() || !face_ids.insert(f.id).second) throw Error(ErrorCode::MalformedInput, "faces: duplicate id '" + f.id + "'");
    for (const auto& [atom_id, v] : f.incidence) {
      if (!ids.count(atom_id)) throw Error(ErrorCode::MalformedInput, "faces." + f.id + ": unknown atom '" + atom_id + "'");
      const Rational twice = 2 * v;
      if (twice.get_den() != 1 || twice < -2 || twice > 2) {
        throw Error(ErrorCode::MalformedInput, "faces." + f.id + ": incidence must lie in {-1,-1/2,0,1/2,1}");
      }
    }
  }
  std::set<std::string> label_ids;
  for (const auto& l : labels) {
    if (l.id.empty() || !label_ids.insert(l.id).second) throw Error(ErrorCode::MalformedInput, "labels: duplicate id '" + l.id + "'");
    std::set<std::string> used;
    for (const auto& eid : l.graph) {
      if (!edge_ids.count(eid)) throw Error(ErrorCode::MalformedInput, "labels." + l.id + ".graph: unknown edge '" + eid + "'");
      for (const auto& letter : edge(eid).letters) {
        if (!used.insert(letter.atom).second) {
          throw Error(ErrorCode::MalformedInput, "labels." + l.id + ".graph: edges share atom '" + letter.atom + "'");
        }
      }
    }
    for (const auto& combo : l.flux_basis)
      for (const auto& [fid, _] : combo.faces)
        if (!face_ids.count(fid)) {
          throw Error(ErrorCode::MalformedInput, "labels." + l.id + ".flux_basis: unknown face '" + fid + "'");
        }
  }
}

EvaluationBasis evaluation_basis(const System& sys) {
  std::map<std::string, std::size_t> index;
  for (std::size_t t = 0; t < sys.atoms.size(); ++t) index[sys.atoms[t].id] = t;
  EvaluationBasis basis(sys.atoms.size());
  for (const auto& e : sys.edges) {
    std::vector<Rational> p(sys.atoms.size(), Rational(0));
    for (const auto& l : e.letters) p[index.at(l.atom)] += l.sign;
    basis.add(DofId{e.id}, std::move(p));
  }
  for (std::size_t t = 0; t < sys.atoms.size(); ++t) {
    std::vector<Rational> p(sys.atoms.size(), Rational(0));
    p[t] = 1;
    basis.add(atom_dof(sys.atoms[t].id), std::move(p));
  }
  return basis;
}

MomentumOperator flux_operator(const System& sys, const FluxCombo& combo) {
  std::vector<std::pair<const Face*, Rational>> terms;
  for (const auto& [fid, c] : combo.faces) terms.emplace_back(&sys.face(fid), c);
  MomentumOperator op{combo.id, {}};
  for (const auto& e : sys.edges) {
    Rational v = 0;
    for (const auto& [f, c] : terms) v += c * epsilon(*f, e);
    op.action.emplace(DofId{e.id}, v);
  }
  for (const auto& a : sys.atoms) {
    Rational v = 0;
    for (const auto& [f, c] : terms) {
      auto it = f->incidence.find(a.id);
      if (it != f->incidence.end()) v += c * it->second;
    }
    op.action.emplace(atom_dof(a.id), v);
  }
  return op;
}

SystemLabel to_system_label(const System& sys, const Label& l) {
  SystemLabel out{l.id, {}, {}};
  for (const auto& combo : l.flux_basis) out.ops.push_back(flux_operator(sys, combo));
  std::vector<DofId> dofs;
  for (const auto& e : l.graph) dofs.push_back(DofId{e});
  out.frame = ReducedFrame(std::move(dofs));
  return out;
}

std::vector<SystemLabel> system_labels(const System& sys) {
  std::vector<SystemLabel> out;
  for (const auto& l : sys.labels) out.push_back(to_system_label(sys, l));
  return out;
}

AssumptionProbes audit_probes(const System& sys) {
  AssumptionProbes probes = sys.probes;
  probes.operator_sets.clear();
  for (const auto& set : sys.operator_probes) {
    std::vector<MomentumOperator> ops;
    for (const auto& combo : set) ops.push_back(flux_operator(sys, combo));
    probes.operator_sets.push_back(std::move(ops));
  }
  return probes;
}

SurjectivityWitness surjectivity_witness(const System& sys, const Label& l) {
  const Graph g = sys.graph(l);
  SurjectivityWitness w{l.id, {}, {}};
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    std::vector<Rational> target(g.edges.size(), Rational(0));
    target[k] = 1;
    const TestConnection A = witness_connection(g, target);
    std::vector<Rational> q;
    for (const auto& a : sys.atoms) {
      auto it = A.values.find(a.id);
      q.push_back(it == A.values.end() ? Rational(0) : it->second);
    }
    w.configurations.push_back(std::move(q));
    w.targets.push_back(std::move(target));
  }
  return w;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Rational> atom_functional(const System& sys, const FluxCombo& combo) {
  std::vector<Rational> v;
  for (const auto& a : sys.atoms) {
    Rational x = 0;
    for (const auto& [fid, c] : combo.faces) {
      const auto& inc = sys.face(fid).incidence;
      auto it = inc.find(a.id);
      if (it != inc.end()) x += c * it->second;
    }
    v.push_back(x);
  }
  return v;
}

Graph interned(System& sys, const Graph& g) {
  Graph out;
  for (const auto& e : g.edges) out.edges.push_back(sys.edge(sys.intern_edge(e)));
  return out;
}

RationalMatrix action_on_graph(const System& sys, const std::vector<FluxCombo>& ops, const Graph& g) {
  RationalMatrix m(ops.size(), g.edges.size());
  for (std::size_t j = 0; j < ops.size(); ++j)
    for (std::size_t i = 0; i < g.edges.size(); ++i)
      for (const auto& [fid, c] : ops[j].faces) m(j, i) += c * epsilon(sys.face(fid), g.edges[i]);
  return m;
}

Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

}  // namespace

Label lambda_join(System& sys, const Label& upper_left, const Label& upper_right, const std::string& id) {
  // (1) a basis of F̂' + F̂, judged by the action on atoms
  std::vector<FluxCombo> ops;
  {
    RationalMatrix rows(0, sys.atoms.size());
    std::size_t rank = 0;
    for (const Label* l : {&upper_left, &upper_right}) {
      for (const auto& combo : l->flux_basis) {
        RationalMatrix candidate = rows.vstack(RationalMatrix::from_rows({atom_functional(sys, combo)}, sys.atoms.size()));
        const std::size_t r = exact_rank(candidate);
        if (r > rank) {
          rows = std::move(candidate);
          rank = r;
          ops.push_back(combo);
        }
      }
    }
  }
  const std::size_t m = ops.size();

  // (2) a common refinement on which those operators stay independent
  Graph g = interned(sys, graph_join(sys.graph(upper_left), sys.graph(upper_right)));
  if (exact_rank(action_on_graph(sys, ops, g)) < m) {
    std::vector<MomentumOperator> as_ops;
    for (const auto& combo : ops) as_ops.push_back(flux_operator(sys, combo));
    std::vector<DofId> pool;
    std::set<std::string> listed;
    for (const auto& a : g.atoms())
      if (listed.insert(a).second) pool.push_back(atom_dof(a));
    for (const auto& a : sys.atoms)
      if (listed.insert(a.id).second) pool.push_back(atom_dof(a.id));
    Graph singles;
    for (const auto& dof : select_independent_dofs(as_ops, pool)) {
      const std::string a = dof.value.substr(5);
      singles.edges.push_back(canonical_piece({Letter{a, 1}}));
    }
    g = interned(sys, graph_join(g, singles));
  }
  const std::size_t n = g.edges.size();

  // (3) G⁰ → [I | G'] by row operations (recorded in T) and column swaps
  RationalMatrix g0 = action_on_graph(sys, ops, g);
  RationalMatrix t = RationalMatrix::identity(m);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t col = n;
    for (std::size_t c = k; c < n && col == n; ++c)
      for (std::size_t r = k; r < m; ++r)
        if (g0(r, c) != 0) {
          col = c;
          break;
        }
    if (col == n) throw Error(ErrorCode::NotResolvable, "join operators became dependent on the refined graph");
    std::size_t row = k;
    for (std::size_t r = k; r < m; ++r)
      if (abs_value(g0(r, col)) > abs_value(g0(row, col))) row = r;
    if (col != k) {
      for (std::size_t r = 0; r < m; ++r) std::swap(g0(r, col), g0(r, k));
      std::swap(perm[col], perm[k]);
    }
    if (row != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(g0(row, c), g0(k, c));
      for (std::size_t c = 0; c < m; ++c) std::swap(t(row, c), t(k, c));
    }
    const Rational inv = 1 / g0(k, k);
    for (std::size_t c = 0; c < n; ++c) g0(k, c) *= inv;
    for (std::size_t c = 0; c < m; ++c) t(k, c) *= inv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == k || g0(r, k) == 0) continue;
      const Rational f = g0(r, k);
      for (std::size_t c = 0; c < n; ++c) g0(r, c) -= f * g0(k, c);
      for (std::size_t c = 0; c < m; ++c) t(r, c) -= f * t(k, c);
    }
  }

  // (4)-(5) new basis T·ops, then dual faces for the trailing edges
  Label out{id, {}, {}};
  for (std::size_t i = 0; i < n; ++i) out.graph.push_back(g.edges[perm[i]].id);
  for (std::size_t j = 0; j < m; ++j) {
    FluxCombo combo{id + ".f" + std::to_string(j), {}};
    for (std::size_t l = 0; l < m; ++l) {
      if (t(j, l) == 0) continue;
      for (const auto& [fid, c] : ops[l].faces) combo.faces[fid] += t(j, l) * c;
    }
    for (auto it = combo.faces.begin(); it != combo.faces.end();) it = it->second == 0 ? combo.faces.erase(it) : std::next(it);
    out.flux_basis.push_back(std::move(combo));
  }
  Graph trailing;
  for (std::size_t i = m; i < n; ++i) trailing.edges.push_back(g.edges[perm[i]]);
  for (const auto& f : dual_flux_basis(trailing)) {
    sys.intern_face(f);
    out.flux_basis.push_back(FluxCombo{f.id, {{f.id, Rational(1)}}});
  }
  return out;
}

void derive_order(System& sys) {
  const EvaluationBasis basis = evaluation_basis(sys);
  const auto labels = system_labels(sys);
  sys.order.clear();
  for (const auto& upper : labels) {
    for (const auto& lower : labels) {
      if (upper.id == lower.id) continue;
      if (auto w = derive_order_witness(upper, lower, basis)) sys.order.push_back({upper.id, lower.id, std::move(*w)});
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kStrands = 2;
constexpr std::size_t kStrandLength = 6;

std::string atom_name(std::size_t i) { return (i < 10 ? "a0" : "a") + std::to_string(i); }

System strand_universe() {
  System sys;
  for (std::size_t s = 0; s < kStrands; ++s)
    for (std::size_t i = 0; i < kStrandLength; ++i) {
      const std::string base = "n" + std::to_string(s) + "_";
      sys.atoms.push_back(AtomicEdge{atom_name(s * kStrandLength + i), base + std::to_string(i),
                                     base + std::to_string(i + 1), false});
    }
  return sys;
}

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::size_t uniform(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  Graph random_graph(std::size_t max_edges) {
    const std::size_t want = uniform(1, max_edges);
    std::vector<bool> used(kStrands * kStrandLength, false);
    Graph g;
    for (std::size_t attempt = 0; attempt < 8 * want && g.edges.size() < want; ++attempt) {
      const std::size_t strand = uniform(0, kStrands - 1);
      const std::size_t len = uniform(1, 3);
      const std::size_t start = uniform(0, kStrandLength - len);
      bool free = true;
      for (std::size_t i = 0; i < len; ++i) free = free && !used[strand * kStrandLength + start + i];
      if (!free) continue;
      EdgeWord e;
      for (std::size_t i = 0; i < len; ++i) {
        used[strand * kStrandLength + start + i] = true;
        e.letters.push_back(Letter{atom_name(strand * kStrandLength + start + i), 1});
      }
      if (uniform(0, 1) == 1) e = e.inverse();
      e.id = word_name(e.letters);
      g.edges.push_back(std::move(e));
    }
    return g;
  }

  std::vector<Face> random_faces(const std::string& label, const Graph& g, const System& sys) {
    const auto support = g.atoms();
    std::vector<Face> faces;
    for (std::size_t j = 0; j < g.edges.size(); ++j) {
      Face f{"S_" + label + "_" + std::to_string(j), {}};
      const std::size_t k = uniform(1, 3);
      for (std::size_t i = 0; i < k; ++i) {
        const std::string atom = uniform(0, 2) < 2 ? support[uniform(0, support.size() - 1)]
                                                   : sys.atoms[uniform(0, sys.atoms.size() - 1)].id;
        const int v = static_cast<int>(uniform(0, 2)) - 1;
        if (v != 0) f.incidence[atom] = v;
      }
      faces.push_back(std::move(f));
    }
    return faces;
  }

 private:
  std::mt19937_64 rng_;
};

Label base_label(System& sys, Generator& gen, const std::string& id, std::size_t n_edges, bool dual_only) {
  Graph g = interned(sys, gen.random_graph(n_edges));
  Label l{id, {}, {}};
  for (const auto& e : g.edges) l.graph.push_back(e.id);
  std::vector<Face> faces;
  if (!dual_only) {
    for (int attempt = 0; attempt < 20 && faces.empty(); ++attempt) {
      auto candidate = gen.random_faces(id, g, sys);
      RationalMatrix gm(g.edges.size(), g.edges.size());
      for (std::size_t j = 0; j < candidate.size(); ++j)
        for (std::size_t i = 0; i < g.edges.size(); ++i) gm(j, i) = epsilon(candidate[j], g.edges[i]);
      if (determinant(gm) != 0) faces = std::move(candidate);
    }
  }
  if (faces.empty()) faces = dual_flux_basis(g);
  for (const auto& f : faces) {
    sys.intern_face(f);
    l.flux_basis.push_back(FluxCombo{f.id, {{f.id, Rational(1)}}});
  }
  return l;
}

void add_probes(System& sys) {
  const auto labels = system_labels(sys);
  sys.probes = {};
  sys.operator_probes.clear();
  for (const auto& l : sys.labels) sys.probes.surjectivity.push_back(surjectivity_witness(sys, l));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      sys.probes.joins.emplace_back(labels[i].id, labels[j].id);
      std::vector<DofId> dofs = labels[i].frame.dofs();
      for (const auto& d : labels[j].frame.dofs())
        if (std::find(dofs.begin(), dofs.end(), d) == dofs.end()) dofs.push_back(d);
      sys.probes.dof_sets.push_back(std::move(dofs));
      std::vector<FluxCombo> ops = sys.labels[i].flux_basis;
      ops.insert(ops.end(), sys.labels[j].flux_basis.begin(), sys.labels[j].flux_basis.end());
      sys.operator_probes.push_back(std::move(ops));
    }
  }
}

}  // namespace

System generate_random_system(const GeneratorOptions& options) {
  if (options.n_edges < 1 || options.depth < 1) {
    throw Error(ErrorCode::MalformedInput, "generator needs n_edges >= 1 and depth >= 1");
  }
  Generator gen(options.seed);
  System sys = strand_universe();
  if (options.depth == 1) {
    sys.labels.push_back(base_label(sys, gen, "L1_0", options.n_edges, true));
  } else {
    for (std::size_t k = 0; k < options.depth; ++k) {
      sys.labels.push_back(base_label(sys, gen, "L1_" + std::to_string(k), options.n_edges, false));
    }
    Label top = lambda_join(sys, sys.labels[0], sys.labels[1], "L2");
    sys.labels.push_back(top);
    for (std::size_t k = 3; k <= options.depth; ++k) {
      const Label base = sys.labels[k - 1];
      top = lambda_join(sys, top, base, "L" + std::to_string(k));
      sys.labels.push_back(top);
    }
  }
  derive_order(sys);
  add_probes(sys);
  return sys;
}

std::vector<std::string> generated_chain(const System& sys) {
  std::vector<std::string> chain;
  for (std::size_t k = sys.labels.size(); k >= 2; --k)
    if (sys.has_label("L" + std::to_string(k))) chain.push_back("L" + std::to_string(k));
  chain.push_back("L1_0");
  return chain;
}

}  // namespace pqk::dpg
