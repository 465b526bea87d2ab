#include "pqk/reduced_spaces.hpp"

#include <set>

#include "pqk/error.hpp"

namespace pqk {

ReducedFrame::ReducedFrame(std::vector<DofId> dofs) : dofs_(std::move(dofs)) {
  std::set<DofId> seen;
  for (const auto& id : dofs_) {
    if (!seen.insert(id).second) throw Error(ErrorCode::MalformedInput, "duplicate d.o.f. '" + id.value + "' in frame");
  }
}

ReducedFrame::ReducedFrame(std::initializer_list<const char*> ids) {
  std::vector<DofId> dofs;
  for (const char* id : ids) dofs.push_back(DofId{id});
  *this = ReducedFrame(std::move(dofs));
}

bool ReducedFrame::contains(const DofId& id) const {
  for (const auto& d : dofs_)
    if (d == id) return true;
  return false;
}

ProjectionMatrix build_projection(const ReducedFrame& target, const ReducedFrame& source,
                                  const CoefficientMap& combos) {
  const std::size_t n = target.size();
  const std::size_t n_src = source.size();
  if (n == 0 || n_src == 0) throw Error(ErrorCode::DimensionMismatch, "empty frame");
  if (n > n_src) {
    throw Error(ErrorCode::DimensionMismatch,
                "target has " + std::to_string(n) + " d.o.f. but source only " + std::to_string(n_src));
  }
  RationalMatrix b(n, n_src);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = combos.find(target[i]);
    if (it == combos.end()) {
      throw Error(ErrorCode::DimensionMismatch, "no coefficients for target d.o.f. '" + target[i].value + "'");
    }
    if (it->second.size() != n_src) {
      throw Error(ErrorCode::DimensionMismatch, "coefficient vector for '" + target[i].value + "' has length " +
                                                    std::to_string(it->second.size()));
    }
    for (std::size_t j = 0; j < n_src; ++j) b(i, j) = it->second[j];
  }
  const std::size_t rank = exact_rank(b);
  if (rank < n) {
    throw Error(ErrorCode::RankDeficient, "projection matrix has rank " + std::to_string(rank) + " < " +
                                              std::to_string(n) + "; target d.o.f. are not independent");
  }
  return ProjectionMatrix{std::move(b), source, target};
}

ProjectionMatrix compose_projections(const ProjectionMatrix& outer, const ProjectionMatrix& inner) {
  if (!(outer.source == inner.target)) {
    throw Error(ErrorCode::FrameMismatch, "outer projection source frame differs from inner target frame");
  }
  return ProjectionMatrix{outer.entries * inner.entries, inner.source, outer.target};
}

namespace {

void require_right_inverse(const ProjectionMatrix& projection, const RationalMatrix& embedding) {
  const auto& b = projection.entries;
  if (embedding.rows() != b.cols() || embedding.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding must be " + std::to_string(b.cols()) + "x" +
                                                  std::to_string(b.rows()));
  }
  if (!(b * embedding).is_identity()) throw Error(ErrorCode::NotARightInverse, "B·W differs from the identity");
}

Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

}  // namespace

KernelDecomposition kernel_decomposition(const ProjectionMatrix& projection, const RationalMatrix& embedding) {
  require_right_inverse(projection, embedding);
  return kernel_decomposition(projection, embedding, null_space(projection.entries));
}

KernelDecomposition kernel_decomposition(const ProjectionMatrix& projection, const RationalMatrix& embedding,
                                         const RationalMatrix& kernel_basis) {
  require_right_inverse(projection, embedding);
  const auto& b = projection.entries;
  const std::size_t kernel_dim = b.cols() - b.rows();
  if (kernel_basis.rows() != b.cols() || kernel_basis.cols() != kernel_dim) {
    throw Error(ErrorCode::DimensionMismatch, "kernel basis must have " + std::to_string(kernel_dim) + " columns");
  }
  if (kernel_dim > 0 && !(b * kernel_basis).is_zero()) {
    throw Error(ErrorCode::NotARightInverse, "kernel basis is not annihilated by B");
  }
  const RationalMatrix joint = kernel_dim > 0 ? kernel_basis.hstack(embedding) : embedding;
  const Rational det = determinant(joint);
  if (det == 0) throw Error(ErrorCode::RankDeficient, "[Kb|W] is singular");
  return KernelDecomposition{kernel_basis, embedding, abs_value(det)};
}

}  // namespace pqk
