#include "pqk/almost_periodic.hpp"

#include "pqk/error.hpp"

namespace pqk {

ComplexRational operator+(const ComplexRational& a, const ComplexRational& b) {
  return {a.re + b.re, a.im + b.im};
}

ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

APVector APVector::exponential(ReducedFrame frame, Frequency b) {
  APVector v(std::move(frame));
  v.add(b, ComplexRational(1));
  return v;
}

APVector& APVector::add(const Frequency& b, const ComplexRational& alpha) {
  if (b.size() != frame_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "frequency has " + std::to_string(b.size()) + " coordinates, frame " +
                                                  std::to_string(frame_.size()));
  }
  ComplexRational& slot = amplitudes_[b];
  slot = slot + alpha;
  if (slot.is_zero()) amplitudes_.erase(b);
  return *this;
}

ComplexRational inner_product(const APVector& v, const APVector& w) {
  if (!(v.frame() == w.frame())) throw Error(ErrorCode::FrameMismatch, "inner product across different frames");
  ComplexRational sum;
  for (const auto& [b, alpha] : v.amplitudes()) {
    auto it = w.amplitudes().find(b);
    if (it != w.amplitudes().end()) sum = sum + alpha.conj() * it->second;
  }
  return sum;
}

APVector promote(const APVector& v, const ProjectionMatrix& projection) {
  if (!(v.frame() == projection.target)) {
    throw Error(ErrorCode::FrameMismatch, "vector frame is not the target frame of the projection");
  }
  const RationalMatrix bt = projection.entries.transpose();
  APVector out(projection.source);
  for (const auto& [b, alpha] : v.amplitudes()) out.add(bt * b, alpha);
  return out;
}

bool limit_equal(const APVector& v, const APVector& w, const ProjectionMatrix& to_first,
                 const ProjectionMatrix& to_second) {
  if (!(to_first.source == to_second.source)) {
    throw Error(ErrorCode::FrameMismatch, "projections do not share a source frame");
  }
  return promote(v, to_first) == promote(w, to_second);
}

}  // namespace pqk
