#pragma once

// Reduced configuration spaces Q_K ≅ R^N, the linear projections between
// them, and the kernel/embedding split used to trace out d.o.f.

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "pqk/rational.hpp"

namespace pqk {

/// Identifier of one configurational elementary d.o.f.
struct DofId {
  std::string value;

  auto operator<=>(const DofId&) const = default;
};

/// Ordered set of independent d.o.f.; defines the coordinates x_1..x_N of Q_K.
class ReducedFrame {
 public:
  ReducedFrame() = default;
  explicit ReducedFrame(std::vector<DofId> dofs);
  ReducedFrame(std::initializer_list<const char*> ids);

  std::size_t size() const noexcept { return dofs_.size(); }
  const std::vector<DofId>& dofs() const noexcept { return dofs_; }
  const DofId& operator[](std::size_t i) const { return dofs_[i]; }
  bool contains(const DofId& id) const;

  bool operator==(const ReducedFrame&) const = default;

 private:
  std::vector<DofId> dofs_;
};

/// Coefficients of one target d.o.f. over the ordered source d.o.f.
using CoefficientMap = std::map<DofId, std::vector<Rational>>;

/// Matrix B with κ_i = B_i^j κ'_j, realizing pr_{KK'} : Q_{K'} → Q_K in coordinates.
struct ProjectionMatrix {
  RationalMatrix entries;
  ReducedFrame source;  // K'
  ReducedFrame target;  // K
};

ProjectionMatrix build_projection(const ReducedFrame& target, const ReducedFrame& source,
                                  const CoefficientMap& combos);

/// outer: K ← K', inner: K' ← K''. Returns K ← K''.
ProjectionMatrix compose_projections(const ProjectionMatrix& outer, const ProjectionMatrix& inner);

/// Q_{K'} = ker B ⊕ W(Q_K) together with the Lebesgue weight |det[Kb|W]|.
struct KernelDecomposition {
  RationalMatrix kernel_basis;  // N' × (N'−N), may have zero columns
  RationalMatrix embedding;     // N' × N
  Rational lebesgue_factor;     // > 0; equals |det W| (the ξ factor) when the kernel is trivial
};

/// Uses the canonical exact null-space basis of B.
KernelDecomposition kernel_decomposition(const ProjectionMatrix& projection, const RationalMatrix& embedding);
/// Same, with a caller-chosen basis of ker B (validated).
KernelDecomposition kernel_decomposition(const ProjectionMatrix& projection, const RationalMatrix& embedding,
                                         const RationalMatrix& kernel_basis);

}  // namespace pqk
