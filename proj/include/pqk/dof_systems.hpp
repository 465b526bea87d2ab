#pragma once

// System labels λ = (F̂, K), the pairing matrix G, the injection ω, the
// order relation between labels and instance-based assumption audits.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqk/rational.hpp"
#include "pqk/reduced_spaces.hpp"

namespace pqk {

/// Finite evaluation model for configurational d.o.f.: each d.o.f. is a
/// linear functional on Q^T, given by its values ("profile") on T test
/// configurations. Two d.o.f. are equal as functions iff their profiles agree.
class EvaluationBasis {
 public:
  EvaluationBasis() = default;
  explicit EvaluationBasis(std::size_t configuration_count) : configuration_count_(configuration_count) {}

  void add(const DofId& id, std::vector<Rational> profile);

  std::size_t configuration_count() const noexcept { return configuration_count_; }
  bool contains(const DofId& id) const { return profiles_.count(id) != 0; }
  const std::vector<Rational>& profile(const DofId& id) const;
  const std::map<DofId, std::vector<Rational>>& profiles() const noexcept { return profiles_; }

  /// Rows are the profiles of the frame d.o.f., in frame order.
  RationalMatrix frame_profiles(const ReducedFrame& frame) const;
  /// κ(q) for a configuration q ∈ Q^T.
  Rational evaluate(const DofId& id, const std::vector<Rational>& configuration) const;

 private:
  std::size_t configuration_count_ = 0;
  std::map<DofId, std::vector<Rational>> profiles_;
};

/// Momentum operator φ̂, known through its constant values φ̂κ.
struct MomentumOperator {
  std::string id;
  std::map<DofId, Rational> action;

  /// Throws MissingAction.
  const Rational& on(const DofId& dof) const;
};

/// Σ coeffs[k]·ops[k], defined on the d.o.f. every operand acts on.
MomentumOperator combine_operators(std::string id, const std::vector<Rational>& coeffs,
                                   const std::vector<MomentumOperator>& ops);

struct SystemLabel {
  std::string id;
  std::vector<MomentumOperator> ops;  // basis of F̂
  ReducedFrame frame;                 // K
};

/// G_{ji} = φ̂_j κ_i.
struct GMatrix {
  RationalMatrix entries;
};

/// Witness for λ' ≥ λ: each κ ∈ K over K' and each basis operator of F̂ over F̂'.
struct OrderWitness {
  CoefficientMap combos;                          // keyed by lower frame d.o.f.
  std::vector<std::vector<Rational>> op_membership;  // row i: lower op i over upper ops
};

struct OrderRelation {
  std::string upper;
  std::string lower;
  OrderWitness witness;
};

struct OrderCheck {
  bool combos_ok = false;
  bool ops_ok = false;
  std::string diagnostic;

  bool holds() const noexcept { return combos_ok && ops_ok; }
  explicit operator bool() const noexcept { return holds(); }
};

GMatrix g_matrix(const SystemLabel& label);
/// Coordinates (φ̂κ_1, …, φ̂κ_N) of the point [φ̂] ∈ Q_K.
std::vector<Rational> operator_point(const MomentumOperator& op, const ReducedFrame& frame);

OrderCheck relation_geq(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                        const EvaluationBasis& basis);

/// B for pr_{KK'} read off the witness combos.
ProjectionMatrix witnessed_projection(const SystemLabel& upper, const SystemLabel& lower,
                                      const OrderWitness& witness);

/// W = G'ᵀ(Gᵀ)⁻¹ with G' the lower operators evaluated on the upper frame.
/// Throws WitnessInvalid unless relation_geq holds.
RationalMatrix injection_omega(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                               const EvaluationBasis& basis);

/// Everything needed to trace out ker pr_{KK'} and pull back along ω.
struct Reduction {
  ProjectionMatrix projection;
  KernelDecomposition split;
};

Reduction reduction(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                    const EvaluationBasis& basis);

/// Solves for combos and operator membership exactly; nullopt if λ' ≥ λ fails.
std::optional<OrderWitness> derive_order_witness(const SystemLabel& upper, const SystemLabel& lower,
                                                 const EvaluationBasis& basis);

/// Witness for λ'' ≥ λ from witnesses for λ'' ≥ λ' and λ' ≥ λ.
OrderWitness compose_witnesses(const SystemLabel& upper, const SystemLabel& middle, const SystemLabel& lower,
                               const OrderWitness& upper_middle, const OrderWitness& middle_lower);

OrderWitness identity_witness(const SystemLabel& label);

/// Greedy selection of d.o.f. from `pool` on which the operators stay
/// linearly independent. Pool order breaks ties. Throws NotResolvable.
std::vector<DofId> select_independent_dofs(const std::vector<MomentumOperator>& ops, const std::vector<DofId>& pool);

struct SurjectivityWitness {
  std::string label;
  std::vector<std::vector<Rational>> configurations;  // points of Q^T
  std::vector<std::vector<Rational>> targets;         // K̃(configuration), each of length N
};

struct AssumptionProbes {
  std::vector<std::vector<DofId>> dof_sets;
  std::vector<std::vector<MomentumOperator>> operator_sets;
  std::vector<SurjectivityWitness> surjectivity;
  std::vector<std::pair<std::string, std::string>> joins;
};

struct AssumptionCheck {
  std::string assumption;  // "A1a", "A4", "directedness", ...
  std::string anchor;      // human-readable name of the checked property
  std::string subject;
  bool pass = false;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  bool passed() const;
  std::size_t failures() const;
};

AssumptionReport check_assumptions(const std::vector<SystemLabel>& family, const std::vector<OrderRelation>& order,
                                   const AssumptionProbes& probes, const EvaluationBasis& basis);

}  // namespace pqk
