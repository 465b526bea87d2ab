#pragma once

// Combinatorial model of the degenerate Plebanski gravity example: atomic
// edges, edge words, graphs, faces with incidence numbers, holonomy and
// flux d.o.f., the graph order and the constructive join of labels.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqk/dof_systems.hpp"
#include "pqk/rational.hpp"

namespace pqk::dpg {

struct AtomicEdge {
  std::string id;
  std::string source;
  std::string target;
  bool loop = false;  // source == target is allowed only when set
};

struct Letter {
  std::string atom;
  int sign = 1;  // +1 or −1

  bool operator==(const Letter&) const = default;
};

/// Reduced, composable word of signed atoms. No atom may appear twice.
struct EdgeWord {
  std::string id;
  std::vector<Letter> letters;

  EdgeWord inverse() const;
  bool same_word(const EdgeWord& other) const { return letters == other.letters; }
};

/// Pairwise atomically disjoint edges.
struct Graph {
  std::vector<EdgeWord> edges;

  std::vector<std::string> atoms() const;
};

struct Face {
  std::string id;
  std::map<std::string, Rational> incidence;  // values in {−1, −½, 0, ½, 1}
};

struct TestConnection {
  std::map<std::string, Rational> values;  // atom → ∫_atom A
};

/// Formal combination Σ c_f φ̂_{S_f} of flux operators.
struct FluxCombo {
  std::string id;
  std::map<std::string, Rational> faces;
};

struct Label {
  std::string id;
  std::vector<std::string> graph;  // edge ids, in frame order
  std::vector<FluxCombo> flux_basis;
};

Rational holonomy(const EdgeWord& e, const TestConnection& A);
/// Connection with holonomy(e_i) = targets[i]. Throws DimensionMismatch.
TestConnection witness_connection(const Graph& g, const std::vector<Rational>& targets);
/// ε(S,e) = Σ sign × incidence over the letters of e.
Rational epsilon(const Face& S, const EdgeWord& e);
/// φ̂_S on the holonomy d.o.f. of every edge in γ.
MomentumOperator flux_operator(const Face& S, const Graph& g);

struct GraphOrder {
  bool accepted = false;
  // Per edge of γ: the γ' edges (id, ±1) whose concatenation spells it.
  std::vector<std::vector<std::pair<std::string, int>>> factorization;
  std::string refused_edge;
};

GraphOrder graph_geq(const Graph& upper, const Graph& lower);

/// Common refinement. Pieces equal to an input edge (or its inverse) keep
/// that edge's id and orientation; new pieces are oriented so that their
/// smallest atom runs forward and named after their letters.
Graph graph_join(const Graph& a, const Graph& b);

/// S_j with incidence sign(first letter) on the first atom of e_j, so that
/// ε(S_j, e_i) = δ_ji.
std::vector<Face> dual_flux_basis(const Graph& g);

/// Identifier of the holonomy d.o.f. of a single atom.
DofId atom_dof(const std::string& atom);

/// A complete system description: the universe plus labels over it.
struct System {
  std::vector<AtomicEdge> atoms;
  std::vector<EdgeWord> edges;
  std::vector<Face> faces;
  std::vector<Label> labels;
  std::vector<OrderRelation> order;
  AssumptionProbes probes;  // operator_sets stay empty; see operator_probes
  std::vector<std::vector<FluxCombo>> operator_probes;

  const AtomicEdge& atom(const std::string& id) const;
  const EdgeWord& edge(const std::string& id) const;
  const Face& face(const std::string& id) const;
  const Label& label(const std::string& id) const;
  bool has_edge(const std::string& id) const;
  bool has_face(const std::string& id) const;
  bool has_label(const std::string& id) const;

  Graph graph(const Label& l) const;
  std::vector<std::string> atom_ids() const;

  /// Registers e unless an edge with the same word (or its inverse) exists;
  /// returns the id that carries the word in this system.
  std::string intern_edge(const EdgeWord& e);
  void intern_face(const Face& f);

  /// Referential integrity, word validity and graph disjointness.
  /// Throws MalformedInput naming the offending entry.
  void validate() const;
};

/// T = #atoms test configurations (unit connections); d.o.f. are every
/// registered edge plus one per atom.
EvaluationBasis evaluation_basis(const System& sys);
MomentumOperator flux_operator(const System& sys, const FluxCombo& combo);
SystemLabel to_system_label(const System& sys, const Label& l);
std::vector<SystemLabel> system_labels(const System& sys);
/// sys.probes with the operator probes resolved to momentum operators.
AssumptionProbes audit_probes(const System& sys);
/// Surjectivity witness for a label built with witness_connection.
SurjectivityWitness surjectivity_witness(const System& sys, const Label& l);

/// λ'' ≥ λ', λ with G'' = [[I, G'], [0, I]]. New edges and faces are
/// registered in `sys`; the label itself is returned, not added.
Label lambda_join(System& sys, const Label& upper_left, const Label& upper_right, const std::string& id);

/// Fills sys.order with derived witnesses for every comparable pair.
void derive_order(System& sys);

struct GeneratorOptions {
  std::size_t n_edges = 3;
  std::size_t depth = 2;
  std::uint64_t seed = 0;
};

/// Deterministic in the seed. depth 1 gives one dual-basis label; depth d
/// gives d random base labels L1_k and the chain L2 = L1_0 ∨ L1_1,
/// L_k = L_{k−1} ∨ L1_{k−1}, plus order witnesses and audit probes.
System generate_random_system(const GeneratorOptions& options);

/// The label chain L_depth ≥ … ≥ L2 ≥ L1_0 of a generated system.
std::vector<std::string> generated_chain(const System& sys);

}  // namespace pqk::dpg
