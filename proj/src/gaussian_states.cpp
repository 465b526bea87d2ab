#include "pqk/gaussian_states.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/float128.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "pqk/error.hpp"

namespace pqk {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// M = Re P − Re R, the quadratic form of the diagonal ρ̌(x,x).
MatrixXd diagonal_form(const GaussianKernel& k) { return sym(k.P.real() - k.R.real()); }

void check_shapes(const GaussianKernel& k) {
  const Index n = k.s.size();
  if (k.P.rows() != n || k.P.cols() != n || k.R.rows() != n || k.R.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "kernel blocks disagree with dim " + std::to_string(n));
  }
}

}  // namespace

Complex GaussianKernel::log_value(const VectorXd& x, const VectorXd& y) const {
  const VectorXcd xc = x.cast<Complex>();
  const VectorXcd yc = y.cast<Complex>();
  Complex e = -0.5 * xc.dot(P * xc);  // dot() conjugates its first argument; x is real
  e += -0.5 * yc.dot(P.conjugate() * yc);
  e += xc.dot(R * yc);
  e += (s.transpose() * xc)(0) + (s.conjugate().transpose() * yc)(0);
  return e + logw;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::PureProjector: return "pure-projector";
    case Provenance::Projected: return "projected";
    case Provenance::Mixed: return "mixed";
  }
  return "unknown";
}

Complex GaussianMixtureState::value(const VectorXd& x, const VectorXd& y) const {
  Complex v = 0.0;
  for (const auto& t : terms) v += t.weight * t.kernel.value(x, y);
  return v;
}

GaussianMixtureState pure_state(const MatrixXcd& A, const VectorXcd& b) {
  const Index n = b.size();
  if (n == 0 || A.rows() != n || A.cols() != n) throw Error(ErrorCode::DimensionMismatch, "A must be N×N with N = |b|");
  const MatrixXcd a = 0.5 * (A + A.transpose());
  Eigen::LLT<MatrixXd> llt(a.real());
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "Re(A) is not positive definite");

  double log_det = 0.0;
  for (Index i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const VectorXd rb = b.real();
  const double log_norm = 0.5 * static_cast<double>(n) * std::log(kPi) - 0.5 * log_det + rb.dot(llt.solve(rb));

  GaussianKernel k{a, MatrixXcd::Zero(n, n), b, -log_norm};
  return GaussianMixtureState{static_cast<std::size_t>(n), {GaussianTerm{1.0, std::move(k)}},
                              Provenance::PureProjector};
}

GaussianMixtureState random_mixture(std::size_t dim, std::size_t terms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto n = static_cast<Index>(dim);
  std::vector<std::pair<double, GaussianMixtureState>> parts;
  for (std::size_t t = 0; t < terms; ++t) {
    MatrixXd m(n, n);
    MatrixXd im(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) m(i, j) = normal(rng);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) im(i, j) = 0.3 * normal(rng);
    const MatrixXd re = m * m.transpose() / static_cast<double>(dim) + MatrixXd::Identity(n, n);
    const MatrixXcd a = re.cast<Complex>() + Complex(0, 1) * (im + im.transpose()).cast<Complex>();
    VectorXcd b(n);
    for (Index i = 0; i < n; ++i) {
      const double x = 0.5 * normal(rng);
      b(i) = Complex(x, 0.5 * normal(rng));
    }
    parts.emplace_back(static_cast<double>(t + 1), pure_state(a, b));
  }
  return mix(parts);
}

GaussianMixtureState mix(const std::vector<std::pair<double, GaussianMixtureState>>& parts) {
  if (parts.empty()) throw Error(ErrorCode::MalformedInput, "empty mixture");
  GaussianMixtureState out{parts.front().second.dim, {}, Provenance::Mixed};
  double total = 0.0;
  for (const auto& [w, s] : parts) {
    if (!(w > 0.0)) throw Error(ErrorCode::MalformedInput, "mixture weights must be positive");
    if (s.dim != out.dim) throw Error(ErrorCode::DimensionMismatch, "mixture of states with different dim");
    total += w;
  }
  for (const auto& [w, s] : parts)
    for (const auto& t : s.terms) out.terms.push_back(GaussianTerm{t.weight * w / total, t.kernel});
  return out;
}

double kernel_trace(const GaussianKernel& k) {
  check_shapes(k);
  const Index n = k.s.size();
  Eigen::LLT<MatrixXd> llt(diagonal_form(k));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::Divergent, "Re P − Re R is not positive definite");
  double log_det = 0.0;
  for (Index i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const VectorXd rs = k.s.real();
  return std::exp(k.logw + 0.5 * static_cast<double>(n) * std::log(kPi) - 0.5 * log_det + rs.dot(llt.solve(rs)));
}

double trace(const GaussianMixtureState& state) {
  double t = 0.0;
  for (const auto& term : state.terms) t += term.weight * kernel_trace(term.kernel);
  return t;
}

TraceGeometry TraceGeometry::from(const KernelDecomposition& split) {
  return TraceGeometry{split.kernel_basis.to_double(), split.embedding.to_double(), split.lebesgue_factor.get_d()};
}

TraceGeometry trace_geometry(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                             const EvaluationBasis& basis) {
  try {
    return TraceGeometry::from(reduction(upper, lower, witness, basis).split);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WitnessInvalid) throw;
    throw Error(ErrorCode::OrderViolation, upper.id + " is not witnessed above " + lower.id + " (" + e.what() + ")");
  }
}

namespace {

GaussianKernel project_kernel(const GaussianKernel& k, const TraceGeometry& g) {
  const MatrixXcd W = g.embedding.cast<Complex>();
  const Index kdim = g.kernel_basis.cols();

  GaussianKernel out;
  out.P = W.transpose() * k.P * W;
  out.R = W.transpose() * k.R * W;
  out.s = W.transpose() * k.s;
  out.logw = k.logw + std::log(g.lebesgue_factor);

  if (kdim > 0) {
    const MatrixXd& Kb = g.kernel_basis;
    const MatrixXd Q = 2.0 * Kb.transpose() * diagonal_form(k) * Kb;
    Eigen::LLT<MatrixXd> llt(Q);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::Divergent, "traced block is not positive definite");
    }
    const MatrixXcd Kc = Kb.cast<Complex>();
    const MatrixXcd A = Kc.transpose() * (k.R.transpose() - k.P) * W;
    const VectorXd c = 2.0 * Kb.transpose() * k.s.real();

    // Q is real, so Q⁻¹ acts on real and imaginary parts separately.
    const MatrixXcd QinvA = llt.solve(A.real()).cast<Complex>() + Complex(0, 1) * llt.solve(A.imag()).cast<Complex>();
    const VectorXd Qinvc = llt.solve(c);
    double log_det = 0.0;
    for (Index i = 0; i < kdim; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));

    out.P -= A.transpose() * QinvA;
    out.R += QinvA.transpose() * A.conjugate();
    out.s += A.transpose() * Qinvc.cast<Complex>();
    out.logw += 0.5 * c.dot(Qinvc) + 0.5 * static_cast<double>(kdim) * std::log(2.0 * kPi) - 0.5 * log_det;
  }
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  out.R = 0.5 * (out.R + out.R.adjoint()).eval();
  return out;
}

void check_geometry(const GaussianMixtureState& state, const TraceGeometry& g) {
  const auto n_up = static_cast<Index>(state.dim);
  if (g.embedding.rows() != n_up || (g.kernel_basis.cols() != 0 && g.kernel_basis.rows() != n_up)) {
    throw Error(ErrorCode::DimensionMismatch, "geometry does not match a state of dim " + std::to_string(state.dim));
  }
  if (g.kernel_basis.cols() + g.embedding.cols() != n_up) {
    throw Error(ErrorCode::DimensionMismatch, "kernel and embedding columns must add up to the source dim");
  }
  if (!(g.lebesgue_factor > 0.0)) throw Error(ErrorCode::DimensionMismatch, "Lebesgue factor must be positive");
}

}  // namespace

ProjectedState project_state(const GaussianMixtureState& state, const TraceGeometry& geometry) {
  check_geometry(state, geometry);
  ProjectedState out;
  out.state.dim = static_cast<std::size_t>(geometry.embedding.cols());
  out.state.provenance = Provenance::Projected;
  for (const auto& term : state.terms) {
    check_shapes(term.kernel);
    out.state.terms.push_back(GaussianTerm{term.weight, project_kernel(term.kernel, geometry)});
  }
  out.raw_trace = trace(out.state);
  for (auto& term : out.state.terms) term.weight /= out.raw_trace;
  return out;
}

ProjectedState project_state(const GaussianMixtureState& state, const SystemLabel& upper, const SystemLabel& lower,
                             const OrderWitness& witness, const EvaluationBasis& basis) {
  if (state.dim != upper.frame.size()) {
    throw Error(ErrorCode::DimensionMismatch, "state has dim " + std::to_string(state.dim) + " but label " +
                                                  upper.id + " has " + std::to_string(upper.frame.size()));
  }
  return project_state(state, trace_geometry(upper, lower, witness, basis));
}

// ---------------------------------------------------------------------------
// Hilbert–Schmidt products. ⟨ρ,ρ⟩ + ⟨σ,σ⟩ − 2Re⟨ρ,σ⟩ cancels almost
// completely for nearby states, so each Gaussian integral is done in binary128.

namespace {

using boost::multiprecision::float128;

struct Cq {
  float128 re = 0;
  float128 im = 0;
};

Cq operator+(const Cq& a, const Cq& b) { return {a.re + b.re, a.im + b.im}; }
Cq operator-(const Cq& a, const Cq& b) { return {a.re - b.re, a.im - b.im}; }
Cq operator*(const Cq& a, const Cq& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
Cq operator/(const Cq& a, const Cq& b) {
  const float128 d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
float128 norm2(const Cq& a) { return a.re * a.re + a.im * a.im; }
Cq cq(Complex z) { return {float128(z.real()), float128(z.imag())}; }

struct CqMatrix {
  std::size_t n = 0;
  std::vector<Cq> a;
  Cq& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
};

// log ∫ exp(−½zᵀQz + Jᵀz) dz = (n/2)log 2π − ½ log det Q + ½JᵀQ⁻¹J for a
// complex symmetric Q with positive definite real part. The branch of
// log det Q is the sum of principal logs of its eigenvalues, all of which
// lie in the right half plane.
Cq log_gaussian_integral(CqMatrix lu, std::vector<Cq> J, Complex eig_log_sum) {
  const std::size_t n = lu.n;
  std::vector<Cq> rhs = J;
  float128 log_abs = 0;
  float128 arg = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (norm2(lu(r, c)) > norm2(lu(p, c))) p = r;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(p, j), lu(c, j));
      std::swap(rhs[p], rhs[c]);
      arg += boost::math::constants::pi<float128>();
    }
    const Cq piv = lu(c, c);
    log_abs += 0.5 * log(norm2(piv));
    arg += atan2(piv.im, piv.re);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Cq f = lu(r, c) / piv;
      for (std::size_t j = c; j < n; ++j) lu(r, j) = lu(r, j) - f * lu(c, j);
      rhs[r] = rhs[r] - f * rhs[c];
    }
  }
  std::vector<Cq> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Cq acc = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) acc = acc - lu(i, j) * x[j];
    x[i] = acc / lu(i, i);
  }
  Cq quad_form;  // JᵀQ⁻¹J without conjugation
  for (std::size_t i = 0; i < n; ++i) quad_form = quad_form + J[i] * x[i];

  const float128 two_pi = 2 * boost::math::constants::pi<float128>();
  const float128 turns = round((float128(eig_log_sum.imag()) - arg) / two_pi);
  arg += turns * two_pi;

  Cq out;
  out.re = 0.5 * float128(static_cast<double>(n)) * log(two_pi) - 0.5 * log_abs + 0.5 * quad_form.re;
  out.im = -0.5 * arg + 0.5 * quad_form.im;
  return out;
}

Cq conj(const Cq& a) { return {a.re, -a.im}; }

// The blocks are summed in binary128: rounding them in double would already
// cost the accuracy hs_distance needs.
Cq kernel_inner(const GaussianKernel& k1, const GaussianKernel& k2) {
  const Index n = k1.s.size();
  const auto un = static_cast<std::size_t>(n);
  CqMatrix Qq{2 * un, std::vector<Cq>(4 * un * un)};
  std::vector<Cq> J(2 * un);
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    J[ui] = cq(k1.s(i)) + conj(cq(k2.s(i)));
    J[un + ui] = conj(cq(k1.s(i))) + cq(k2.s(i));
    for (Index j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const Cq r = cq(k1.R(i, j)) + conj(cq(k2.R(i, j)));
      const Cq rt = cq(k1.R(j, i)) + conj(cq(k2.R(j, i)));
      Qq(ui, uj) = cq(k1.P(i, j)) + conj(cq(k2.P(i, j)));
      Qq(ui, un + uj) = Cq{} - r;
      Qq(un + ui, uj) = Cq{} - rt;
      Qq(un + ui, un + uj) = conj(cq(k1.P(i, j))) + cq(k2.P(i, j));
    }
  }
  MatrixXcd Q(2 * n, 2 * n);
  for (std::size_t i = 0; i < 2 * un; ++i)
    for (std::size_t j = 0; j < 2 * un; ++j) {
      const Cq& z = Qq(i, j);
      Q(static_cast<Index>(i), static_cast<Index>(j)) = Complex(static_cast<double>(z.re), static_cast<double>(z.im));
    }

  Eigen::LLT<MatrixXd> llt(sym(Q.real()));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::Divergent, "kernels are not Hilbert–Schmidt");
  const Complex eig_log_sum = Eigen::ComplexEigenSolver<MatrixXcd>(Q, false).eigenvalues().array().log().sum();

  Cq e = log_gaussian_integral(std::move(Qq), std::move(J), eig_log_sum);
  e.re += float128(k1.logw) + float128(k2.logw);
  const float128 mag = exp(e.re);
  return {mag * cos(e.im), mag * sin(e.im)};
}

Cq state_inner(const GaussianMixtureState& a, const GaussianMixtureState& b) {
  if (a.dim != b.dim) {
    throw Error(ErrorCode::DimensionMismatch, "dim " + std::to_string(a.dim) + " vs " + std::to_string(b.dim));
  }
  Cq total;
  for (const auto& ta : a.terms) {
    for (const auto& tb : b.terms) {
      const Cq v = kernel_inner(ta.kernel, tb.kernel);
      const float128 w = float128(ta.weight) * float128(tb.weight);
      total = total + Cq{w * v.re, w * v.im};
    }
  }
  return total;
}

}  // namespace

Complex hs_inner(const GaussianMixtureState& a, const GaussianMixtureState& b) {
  const Cq v = state_inner(a, b);
  return {static_cast<double>(v.re), static_cast<double>(v.im)};
}

double hs_distance(const GaussianMixtureState& a, const GaussianMixtureState& b) {
  const float128 d2 = state_inner(a, a).re + state_inner(b, b).re - 2 * state_inner(a, b).re;
  return d2 > 0 ? static_cast<double>(sqrt(d2)) : 0.0;
}

double purity(const GaussianMixtureState& state) { return hs_inner(state, state).real(); }

ConsistencyReport verify_consistency(const GaussianMixtureState& state, const TraceGeometry& top_to_bottom,
                                     const TraceGeometry& top_to_middle, const TraceGeometry& middle_to_bottom,
                                     double tol) {
  const ProjectedState direct = project_state(state, top_to_bottom);
  const ProjectedState middle = project_state(state, top_to_middle);
  const ProjectedState chained = project_state(middle.state, middle_to_bottom);
  ConsistencyReport r;
  r.distance = hs_distance(direct.state, chained.state);
  r.tolerance = tol;
  r.direct_drift = direct.drift();
  r.chained_drift = middle.raw_trace * chained.raw_trace - 1.0;
  r.pass = r.distance <= tol;
  return r;
}

ConsistencyReport verify_consistency(const GaussianMixtureState& state, const SystemLabel& top,
                                     const SystemLabel& middle, const SystemLabel& bottom,
                                     const OrderWitness& top_middle, const OrderWitness& middle_bottom,
                                     const EvaluationBasis& basis, double tol) {
  const OrderWitness direct = compose_witnesses(top, middle, bottom, top_middle, middle_bottom);
  return verify_consistency(state, trace_geometry(top, bottom, direct, basis),
                            trace_geometry(top, middle, top_middle, basis),
                            trace_geometry(middle, bottom, middle_bottom, basis), tol);
}

// ---------------------------------------------------------------------------
// Quadrature oracle. It only evaluates the original kernel at lifted points;
// none of the closed-form algebra above is reused for the integral itself.

std::vector<KernelSample> oracle_sample_points(std::size_t dim, std::size_t count) {
  // Kronecker sequence with irrational steps √p mod 1 for the first primes.
  static constexpr double kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  constexpr std::size_t kMaxDim = std::size(kPrimes) / 2;
  if (dim > kMaxDim) throw Error(ErrorCode::DimensionMismatch, "oracle sampling supports dim <= 10");
  std::vector<KernelSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    KernelSample s{VectorXd(static_cast<Index>(dim)), VectorXd(static_cast<Index>(dim))};
    for (std::size_t d = 0; d < 2 * dim; ++d) {
      const double step = std::sqrt(kPrimes[d]);
      const double u = std::fmod(static_cast<double>(i + 1) * step, 1.0);
      (d < dim ? s.x(static_cast<Index>(d)) : s.y(static_cast<Index>(d - dim))) = -2.0 + 4.0 * u;
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

// erfc-based tail bound of |integrand| over ker coordinates outside the box.
double tail_mass(const GaussianKernel& k, const TraceGeometry& g, const KernelSample& sample, double extent) {
  const MatrixXd& Kb = g.kernel_basis;
  const MatrixXd Q = 2.0 * Kb.transpose() * diagonal_form(k) * Kb;
  Eigen::LLT<MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::Divergent, "traced block is not positive definite");
  const MatrixXcd W = g.embedding.cast<Complex>();
  const MatrixXcd A = Kb.cast<Complex>().transpose() * (k.R.transpose() - k.P) * W;
  const VectorXd reJ = (A * sample.x.cast<Complex>() + A.conjugate() * sample.y.cast<Complex>()).real() +
                       2.0 * Kb.transpose() * k.s.real();
  const VectorXd mu = llt.solve(reJ);
  const MatrixXd cov = llt.solve(MatrixXd::Identity(Q.rows(), Q.cols()));
  double tail = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    const double sigma = std::sqrt(cov(i, i));
    tail += std::erfc((extent - std::abs(mu(i))) / (std::sqrt(2.0) * sigma));
  }
  return tail;
}

}  // namespace

std::vector<Complex> quadrature_partial_trace(const GaussianMixtureState& state, const TraceGeometry& exact_geometry,
                                              std::size_t grid_points, double extent,
                                              const std::vector<KernelSample>& samples) {
  check_geometry(state, exact_geometry);
  // The grid lives on an orthonormal kernel frame so its spacing is in the
  // same units as the state. Kb·a = Q·u with u = R·a, hence da = du/|det R|.
  TraceGeometry geometry = exact_geometry;
  if (geometry.kernel_basis.cols() > 0) {
    const auto k = geometry.kernel_basis.cols();
    Eigen::HouseholderQR<MatrixXd> qr(exact_geometry.kernel_basis);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(exact_geometry.kernel_basis.rows(), k);
    const MatrixXd r = q.transpose() * exact_geometry.kernel_basis;
    geometry.kernel_basis = q;
    geometry.lebesgue_factor = exact_geometry.lebesgue_factor / std::abs(r.determinant());
  }
  if (grid_points < 16) throw Error(ErrorCode::MalformedInput, "grid_points must be at least 16");
  if (!(extent > 0.0)) throw Error(ErrorCode::ExtentTooSmall, "extent must be positive");
  const Index kdim = geometry.kernel_basis.cols();
  const Index n = geometry.embedding.cols();

  for (const auto& sample : samples) {
    if (sample.x.size() != n || sample.y.size() != n) throw Error(ErrorCode::DimensionMismatch, "sample point dim");
    if (kdim == 0) continue;
    for (const auto& term : state.terms) {
      const double tail = tail_mass(term.kernel, geometry, sample, extent);
      if (tail > 1e-6) {
        throw Error(ErrorCode::ExtentTooSmall, "estimated tail mass " + std::to_string(tail) + " exceeds 1e-6");
      }
    }
  }

  const double h = 2.0 * extent / static_cast<double>(grid_points);
  const double cell = std::pow(h, static_cast<double>(kdim)) * geometry.lebesgue_factor;
  std::size_t cells = 1;
  for (Index d = 0; d < kdim; ++d) cells *= grid_points;

  std::vector<Complex> out;
  out.reserve(samples.size());
  std::vector<std::size_t> idx(static_cast<std::size_t>(kdim));
  VectorXd a(kdim);
  for (const auto& sample : samples) {
    const VectorXd wx = geometry.embedding * sample.x;
    const VectorXd wy = geometry.embedding * sample.y;
    Complex acc = 0.0;
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t c = 0; c < cells; ++c) {
      for (Index d = 0; d < kdim; ++d) {
        a(d) = -extent + (static_cast<double>(idx[static_cast<std::size_t>(d)]) + 0.5) * h;
      }
      const VectorXd shift = geometry.kernel_basis * a;
      acc += state.value(shift + wx, shift + wy);
      for (std::size_t d = 0; d < idx.size() && ++idx[d] == grid_points; ++d) idx[d] = 0;
    }
    out.push_back(acc * cell);
  }
  return out;
}

OracleComparison compare_with_oracle(const GaussianMixtureState& state, const TraceGeometry& geometry,
                                     std::size_t grid_points, double extent, std::size_t sample_count) {
  const ProjectedState closed = project_state(state, geometry);
  const auto samples = oracle_sample_points(closed.state.dim, sample_count);
  const auto oracle = quadrature_partial_trace(state, geometry, grid_points, extent, samples);

  std::vector<Complex> exact;
  double scale = 0.0;
  for (const auto& s : samples) {
    exact.push_back(closed.raw_trace * closed.state.value(s.x, s.y));
    scale = std::max(scale, std::abs(exact.back()));
  }
  OracleComparison cmp{0.0, samples.size()};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double denom = std::max(std::abs(exact[i]), 1e-12 * scale);
    cmp.max_relative_error = std::max(cmp.max_relative_error, std::abs(oracle[i] - exact[i]) / denom);
  }
  return cmp;
}

double min_grid_eigenvalue(const GaussianMixtureState& state, std::size_t grid_points, double extent) {
  const auto n = static_cast<Index>(state.dim);
  std::size_t count = 1;
  for (Index d = 0; d < n; ++d) count *= grid_points;
  const double h = 2.0 * extent / static_cast<double>(grid_points);

  std::vector<VectorXd> pts;
  pts.reserve(count);
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t c = 0; c < count; ++c) {
    VectorXd p(n);
    for (Index d = 0; d < n; ++d) p(d) = -extent + (static_cast<double>(idx[static_cast<std::size_t>(d)]) + 0.5) * h;
    pts.push_back(std::move(p));
    for (std::size_t d = 0; d < idx.size() && ++idx[d] == grid_points; ++d) idx[d] = 0;
  }
  const double vol = std::pow(h, static_cast<double>(n));
  // The solver reads the lower triangle only; the kernel is Hermitian by construction.
  MatrixXcd H = MatrixXcd::Zero(static_cast<Index>(count), static_cast<Index>(count));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      H(static_cast<Index>(i), static_cast<Index>(j)) = state.value(pts[i], pts[j]) * vol;
  return Eigen::SelfAdjointEigenSolver<MatrixXcd>(H, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

bool CoherenceReport::pass() const {
  for (const auto& p : pairs)
    if (!p.pass) return false;
  return true;
}

CoherenceReport check_coherent_family(const CoherentFamily& family, const EvaluationBasis& basis, double tol) {
  std::map<std::string, const SystemLabel*> labels;
  for (const auto& l : family.labels) labels.emplace(l.id, &l);
  CoherenceReport report;
  for (const auto& rel : family.order) {
    CoherencePair pair{rel.upper, rel.lower, 0.0, false, {}};
    auto up = labels.find(rel.upper);
    auto lo = labels.find(rel.lower);
    auto su = family.states.find(rel.upper);
    auto sl = family.states.find(rel.lower);
    if (up == labels.end() || lo == labels.end()) {
      pair.detail = "unknown label";
    } else if (su == family.states.end() || sl == family.states.end()) {
      pair.detail = "no state assigned";
    } else {
      try {
        const ProjectedState p = project_state(su->second, *up->second, *lo->second, rel.witness, basis);
        pair.distance = hs_distance(p.state, sl->second);
        pair.pass = pair.distance <= tol;
        pair.detail = pair.pass ? "coherent" : "projected state differs";
      } catch (const Error& e) {
        pair.detail = e.what();
      }
    }
    report.pairs.push_back(std::move(pair));
  }
  return report;
}

}  // namespace pqk
