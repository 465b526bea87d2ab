#pragma once

// Finite almost periodic functions Σ α_b e_b on Q_K, e_b(a) = exp(i b(a)),
// with the Kronecker inner product and the promotions U_{K'K}.

#include <map>
#include <vector>

#include "pqk/rational.hpp"
#include "pqk/reduced_spaces.hpp"

namespace pqk {

struct ComplexRational {
  Rational re;
  Rational im;

  ComplexRational() = default;
  ComplexRational(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}

  ComplexRational conj() const { return {re, -im}; }
  bool is_zero() const { return re == 0 && im == 0; }
  bool operator==(const ComplexRational&) const = default;
};

ComplexRational operator+(const ComplexRational& a, const ComplexRational& b);
ComplexRational operator*(const ComplexRational& a, const ComplexRational& b);

/// Coordinates of b ∈ Q_K* in the dual of the frame coordinates.
using Frequency = std::vector<Rational>;

class APVector {
 public:
  explicit APVector(ReducedFrame frame) : frame_(std::move(frame)) {}

  /// e_b. Throws DimensionMismatch.
  static APVector exponential(ReducedFrame frame, Frequency b);

  /// Adds α e_b; zero amplitudes are pruned.
  APVector& add(const Frequency& b, const ComplexRational& alpha);

  const ReducedFrame& frame() const noexcept { return frame_; }
  const std::map<Frequency, ComplexRational>& amplitudes() const noexcept { return amplitudes_; }

  bool operator==(const APVector&) const = default;

 private:
  ReducedFrame frame_;
  std::map<Frequency, ComplexRational> amplitudes_;
};

/// Σ conj(v_b) w_b; conjugate-linear in the first slot. Throws FrameMismatch.
ComplexRational inner_product(const APVector& v, const APVector& w);

/// U_{K'K}: b ↦ Bᵀb with B realizing pr_{KK'}. Throws FrameMismatch.
APVector promote(const APVector& v, const ProjectionMatrix& projection);

/// Whether v over K₁ and w over K₂ are the same vector of the inductive
/// limit, judged over a common K₃. Throws FrameMismatch.
bool limit_equal(const APVector& v, const APVector& w, const ProjectionMatrix& to_first,
                 const ProjectionMatrix& to_second);

}  // namespace pqk
