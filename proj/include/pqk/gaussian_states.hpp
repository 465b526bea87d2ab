#pragma once

// Density operators on L²(R^N) as positive mixtures of Gaussian kernels,
// with the partial-trace projection between labels in closed form.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pqk/dof_systems.hpp"
#include "pqk/reduced_spaces.hpp"

namespace pqk {

using Complex = std::complex<double>;

/// ρ̌(x,y) = exp(−½xᵀPx − ½yᵀP̄y + xᵀRy + sᵀx + s̄ᵀy + logw).
/// P complex symmetric, R Hermitian, logw real; Hermiticity of the
/// operator then holds by construction.
struct GaussianKernel {
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd R;
  Eigen::VectorXcd s;
  double logw = 0.0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(s.size()); }
  Complex log_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  Complex value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const { return std::exp(log_value(x, y)); }
};

enum class Provenance { PureProjector, Projected, Mixed };

std::string_view to_string(Provenance p);

struct GaussianTerm {
  double weight = 0.0;
  GaussianKernel kernel;
};

struct GaussianMixtureState {
  std::size_t dim = 0;
  std::vector<GaussianTerm> terms;
  Provenance provenance = Provenance::PureProjector;

  Complex value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
};

/// Normalized projector onto ψ(x) = exp(−½xᵀAx + bᵀx). Throws NotPositiveDefinite.
GaussianMixtureState pure_state(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b);

/// Seeded mixture of `terms` random pure states (weights 1, 2, …, terms),
/// each with Re A ≥ I and a small imaginary part.
GaussianMixtureState random_mixture(std::size_t dim, std::size_t terms, std::uint64_t seed);

/// Convex combination; weights are rescaled to sum to one.
GaussianMixtureState mix(const std::vector<std::pair<double, GaussianMixtureState>>& parts);

/// ∫ρ̌(x,x)dx of one kernel. Throws Divergent.
double kernel_trace(const GaussianKernel& kernel);
double trace(const GaussianMixtureState& state);

/// Coordinates of the split Q_{K'} = ker pr ⊕ W(Q_K) in floating point.
/// Unvalidated on purpose: callers may perturb it to probe sensitivity.
struct TraceGeometry {
  Eigen::MatrixXd kernel_basis;  // N'×k
  Eigen::MatrixXd embedding;     // N'×N
  double lebesgue_factor = 1.0;

  static TraceGeometry from(const KernelDecomposition& split);
};

/// Geometry of π_{λλ'} from a witnessed pair. Throws OrderViolation.
TraceGeometry trace_geometry(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                             const EvaluationBasis& basis);

struct ProjectedState {
  GaussianMixtureState state;  // renormalized to trace 1
  double raw_trace = 1.0;      // trace before renormalization

  double drift() const noexcept { return raw_trace - 1.0; }
};

/// (πρ̌)(x,y) = ∫ ρ̌(Kb·a + W·x, Kb·a + W·y) |det[Kb|W]| da, per term.
/// Throws Divergent when the traced block is not positive definite.
ProjectedState project_state(const GaussianMixtureState& state, const TraceGeometry& geometry);

/// π_{λλ'}. Throws OrderViolation unless the witness verifies.
ProjectedState project_state(const GaussianMixtureState& state, const SystemLabel& upper, const SystemLabel& lower,
                             const OrderWitness& witness, const EvaluationBasis& basis);

/// ∫∫ ρ̌₁(x,y) conj(ρ̌₂(x,y)) dx dy, evaluated in binary128.
Complex hs_inner(const GaussianMixtureState& a, const GaussianMixtureState& b);
double hs_distance(const GaussianMixtureState& a, const GaussianMixtureState& b);
double purity(const GaussianMixtureState& state);

struct ConsistencyReport {
  double distance = 0.0;
  double tolerance = 0.0;
  double direct_drift = 0.0;
  double chained_drift = 0.0;
  bool pass = false;
};

/// Compares π_{λλ''}ρ with π_{λλ'}π_{λ'λ''}ρ.
ConsistencyReport verify_consistency(const GaussianMixtureState& state, const TraceGeometry& top_to_bottom,
                                     const TraceGeometry& top_to_middle, const TraceGeometry& middle_to_bottom,
                                     double tol);
/// Same, for a witnessed chain top ≥ middle ≥ bottom; the direct witness
/// is the composition of the two given ones.
ConsistencyReport verify_consistency(const GaussianMixtureState& state, const SystemLabel& top,
                                     const SystemLabel& middle, const SystemLabel& bottom,
                                     const OrderWitness& top_middle, const OrderWitness& middle_bottom,
                                     const EvaluationBasis& basis, double tol);

struct KernelSample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Deterministic sample points with coordinates in [−2, 2].
std::vector<KernelSample> oracle_sample_points(std::size_t dim, std::size_t count);

/// Midpoint rule over [−extent, extent]^k in an orthonormalized kernel frame, weighted by
/// the Lebesgue factor. Returns the unnormalized partial-trace kernel at each
/// sample. Throws ExtentTooSmall when the estimated tail mass exceeds 1e−6.
std::vector<Complex> quadrature_partial_trace(const GaussianMixtureState& state, const TraceGeometry& geometry,
                                              std::size_t grid_points, double extent,
                                              const std::vector<KernelSample>& samples);

struct OracleComparison {
  double max_relative_error = 0.0;
  std::size_t samples = 0;
};

/// Closed form (scaled back by its raw trace) against the quadrature oracle.
OracleComparison compare_with_oracle(const GaussianMixtureState& state, const TraceGeometry& geometry,
                                     std::size_t grid_points, double extent, std::size_t sample_count = 64);

/// Smallest eigenvalue of the Hermitian matrix ρ̌(x_i,x_j)·h^N on a midpoint
/// grid with `grid_points` per axis over [−extent, extent]^N.
double min_grid_eigenvalue(const GaussianMixtureState& state, std::size_t grid_points, double extent);

struct CoherentFamily {
  std::vector<SystemLabel> labels;
  std::map<std::string, GaussianMixtureState> states;
  std::vector<OrderRelation> order;
};

struct CoherencePair {
  std::string upper;
  std::string lower;
  double distance = 0.0;
  bool pass = false;
  std::string detail;
};

struct CoherenceReport {
  std::vector<CoherencePair> pairs;
  bool pass() const;
};

CoherenceReport check_coherent_family(const CoherentFamily& family, const EvaluationBasis& basis, double tol);

}  // namespace pqk
