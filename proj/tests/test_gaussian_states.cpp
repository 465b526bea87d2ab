#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pqk/dpg.hpp"
#include "pqk/error.hpp"
#include "pqk/gaussian_states.hpp"
#include "support.hpp"

using namespace pqk;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::MalformedInput;
}

GaussianMixtureState ground(std::size_t n, double center = 0.0) {
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  b(0) = center;
  return pure_state(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)), b);
}

TraceGeometry geometry(const RationalMatrix& b, const RationalMatrix& w) {
  const ReducedFrame target = test::frame("k", b.rows()), source = test::frame("q", b.cols());
  CoefficientMap combos;
  for (std::size_t i = 0; i < b.rows(); ++i) combos[target[i]] = b.row(i);
  return TraceGeometry::from(kernel_decomposition(build_projection(target, source, combos), w));
}

// Midpoint rule for ∫ f over [−l, l].
template <class F>
double midpoint(F f, double l, int n) {
  const double h = 2 * l / n;
  double s = 0;
  for (int i = 0; i < n; ++i) s += f(-l + (i + 0.5) * h);
  return s * h;
}

}  // namespace

TEST_CASE("pure_state examples") {
  const auto g = ground(1);
  REQUIRE(g.dim == 1);
  for (double x : {-1.5, 0.0, 0.3, 2.0})
    for (double y : {-0.7, 0.0, 1.1}) {
      const double expected = std::exp(-(x * x + y * y) / 2) / std::sqrt(kPi);
      CHECK(std::abs(g.value(Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, y)) - expected) <
            1e-14);
    }
  // ∫ π^{−1/2} e^{−x²} dx = 1 by quadrature
  const double diag = midpoint([&](double x) {
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, x);
    return g.value(v, v).real();
  }, 8.0, 400);
  CHECK(std::abs(diag - 1.0) < 1e-12);
  CHECK(std::abs(trace(g) - 1.0) < 1e-12);

  const auto g2 = ground(2);
  Eigen::VectorXd x(2), y(2);
  x << 0.4, -1.0;
  y << 1.3, 0.2;
  const Complex product = g.value(x.head(1), y.head(1)) * g.value(x.tail(1), y.tail(1));
  CHECK(std::abs(g2.value(x, y) - product) < 1e-14);

  Eigen::MatrixXcd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK(code_of([&] { pure_state(indefinite, Eigen::VectorXcd::Zero(2)); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("trace examples") {
  CHECK(std::abs(trace(random_mixture(3, 1, 4)) - 1.0) < 1e-12);
  const auto mixed = mix({{0.3, ground(1)}, {0.7, ground(1, 1.5)}});
  CHECK(std::abs(trace(mixed) - 1.0) < 1e-12);
  GaussianKernel k = ground(1).terms.front().kernel;
  k.R(0, 0) = 2.0;  // Re P − Re R = 1 − 2 < 0
  CHECK(code_of([&] { kernel_trace(k); }) == ErrorCode::Divergent);
}

TEST_CASE("structural Hermiticity") {
  const auto s = random_mixture(3, 3, 9);
  test::Rng rng(3);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd x(3), y(3);
    for (int k = 0; k < 3; ++k) {
      x(k) = rng.real(-2, 2);
      y(k) = rng.real(-2, 2);
    }
    worst = std::max(worst, std::abs(s.value(x, y) - std::conj(s.value(y, x))) / std::abs(s.value(x, y)));
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("project_state examples") {
  SUBCASE("product state keeps the surviving factor") {
    Eigen::MatrixXcd a(2, 2);
    a << 2.0, 0.0, 0.0, Complex(0.7, 0.2);
    Eigen::VectorXcd b(2);
    b << 0.5, Complex(-0.3, 0.4);
    const auto rho = pure_state(a, b);
    const auto rho_b = pure_state(a.block(1, 1, 1, 1), b.tail(1));
    const auto out = project_state(rho, geometry(RationalMatrix{{0, 1}}, RationalMatrix{{0}, {1}}));
    CHECK(std::abs(out.raw_trace - 1.0) < 1e-12);
    CHECK(hs_distance(out.state, rho_b) < 1e-12);
  }
  SUBCASE("two-dimensional ground state to one dimension") {
    const auto out = project_state(ground(2), geometry(RationalMatrix{{1, 0}}, RationalMatrix{{1}, {0}}));
    for (double x : {-2.0, 0.0, 0.5})
      for (double y : {-1.0, 1.7}) {
        const double expected = std::exp(-(x * x + y * y) / 2) / std::sqrt(kPi);
        CHECK(std::abs(out.state.value(Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, y)) -
                       expected) < 1e-13);
      }
  }
  SUBCASE("correlated pure state becomes mixed; purity matches a grid oracle") {
    Eigen::MatrixXcd a(2, 2);
    a << 1.0, 0.3, 0.3, 1.0;
    const auto out = project_state(pure_state(a, Eigen::VectorXcd::Zero(2)),
                                   geometry(RationalMatrix{{1, 0}}, RationalMatrix{{1}, {0}}));
    // ψ(x, a) = exp(−(x² + a²)/2 − 0.3xa); reduced kernel and purity on a grid.
    const int n = 160;
    const double l = 8.0, h = 2 * l / n;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = -l + (i + 0.5) * h;
    auto psi = [](double x, double y) { return std::exp(-(x * x + y * y) / 2 - 0.3 * x * y); };
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) rho(i, j) += psi(grid[i], grid[k]) * psi(grid[j], grid[k]) * h;
    const double tr = rho.diagonal().sum() * h;
    const double oracle = rho.squaredNorm() * h * h / (tr * tr);
    const double p = purity(out.state);
    CHECK(p < 1.0 - 1e-3);
    CHECK(std::abs(p - oracle) < 1e-9);
  }
}

TEST_CASE("property: kernel basis choice does not change the projection") {
  test::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = random_mixture(3, 2, static_cast<std::uint64_t>(trial));
    const RationalMatrix b{{1, 1, 0}};
    const RationalMatrix w{{1}, {0}, {0}};
    const ReducedFrame target = test::frame("k", 1), source = test::frame("q", 3);
    const auto pr = build_projection(target, source, {{target[0], b.row(0)}});
    const auto split = kernel_decomposition(pr, w);
    const auto other = kernel_decomposition(pr, w, split.kernel_basis * rng.invertible(2));
    const auto p1 = project_state(rho, TraceGeometry::from(split));
    const auto p2 = project_state(rho, TraceGeometry::from(other));
    CHECK(hs_distance(p1.state, p2.state) < 1e-10);
    CHECK(std::abs(p1.raw_trace - p2.raw_trace) < 1e-10);
  }
}

TEST_CASE("hs_distance examples") {
  const auto s = random_mixture(2, 3, 1);
  CHECK(hs_distance(s, s) < 1e-12);
  // Unit-width ground states at 0 and 5: |⟨ψ₀|ψ₅⟩|² = e^{−25/2}, so d² = 2 − 2e^{−12.5}.
  const double d = hs_distance(ground(1), ground(1, 5.0));
  CHECK(d > 1.0);
  CHECK(std::abs(d - std::sqrt(2 - 2 * std::exp(-12.5))) < 1e-12);
  // Grid cross-check of the same quantity from the kernels themselves.
  const auto g0 = ground(1), g5 = ground(1, 5.0);
  const int n = 240;
  const double l = 10.0, h = 2 * l / n;
  double sum = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, -l + (i + 0.5) * h);
      const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, -l + (j + 0.5) * h);
      sum += std::norm(g0.value(x, y) - g5.value(x, y));
    }
  CHECK(std::abs(std::sqrt(sum * h * h) - d) < 1e-9);
  CHECK(code_of([&] { hs_distance(ground(1), ground(2)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("purity of pure and mixed states") {
  CHECK(std::abs(purity(ground(2)) - 1.0) < 1e-12);
  // Two orthogonal-ish far-apart states with weights 1/2: purity → 1/2.
  const auto m = mix({{0.5, ground(1, -12.0)}, {0.5, ground(1, 12.0)}});
  CHECK(std::abs(purity(m) - 0.5) < 1e-12);
}

TEST_CASE("partial trace can raise the purity of a mixed state") {
  // x1 in its ground state, x2 in an even mixture of two distant displacements.
  // Tracing out x2 leaves the pure x1 factor, so purity rises from 1/2 to 1.
  auto displaced = [](double c) {
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(2);
    b(1) = c;
    return pure_state(Eigen::MatrixXcd::Identity(2, 2), b);
  };
  const auto rho = mix({{0.5, displaced(-12.0)}, {0.5, displaced(12.0)}});
  const auto reduced = project_state(rho, geometry(RationalMatrix{{1, 0}}, RationalMatrix{{1}, {0}}));
  CHECK(std::abs(purity(rho) - 0.5) < 1e-12);
  CHECK(std::abs(purity(reduced.state) - 1.0) < 1e-12);
  // Independent check of the reduced purity: ∫∫|ρ(x,y)|² on a grid.
  const int n = 128;
  const double l = 8, h = 2 * l / n;
  double grid = 0;
  Eigen::VectorXd x(1), y(1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      x(0) = -l + (i + 0.5) * h, y(0) = -l + (j + 0.5) * h;
      grid += std::norm(reduced.state.value(x, y)) * h * h;
    }
  CHECK(grid == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("verify_consistency") {
  const dpg::System sys = dpg::generate_random_system({4, 3, 11});
  const auto basis = dpg::evaluation_basis(sys);
  const auto chain = dpg::generated_chain(sys);
  const auto top = dpg::to_system_label(sys, sys.label(chain[0]));
  const auto mid = dpg::to_system_label(sys, sys.label(chain[1]));
  const auto bot = dpg::to_system_label(sys, sys.label(chain[2]));
  const auto tm = *derive_order_witness(top, mid, basis);
  const auto mb = *derive_order_witness(mid, bot, basis);
  const auto rho = random_mixture(top.frame.size(), 3, 2);

  const auto r = verify_consistency(rho, top, mid, bot, tm, mb, basis, 1e-9);
  CHECK(r.pass);
  CHECK(r.distance <= 1e-9);

  const auto self = identity_witness(top);
  const auto trivial = verify_consistency(rho, top, top, top, self, self, basis, 1e-9);
  CHECK(trivial.distance < 1e-14);

  const TraceGeometry g_tm = trace_geometry(top, mid, tm, basis);
  const TraceGeometry g_mb = trace_geometry(mid, bot, mb, basis);
  const TraceGeometry g_tb = trace_geometry(top, bot, compose_witnesses(top, mid, bot, tm, mb), basis);
  TraceGeometry corrupted = g_tm;
  corrupted.embedding(0, 0) += 0.1;
  const auto bad = verify_consistency(rho, g_tb, corrupted, g_mb, 1e-9);
  CHECK_FALSE(bad.pass);
  CHECK(bad.distance > 1e-3);

  OrderWitness broken = tm;
  broken.combos.begin()->second.front() += 1;
  CHECK(code_of([&] { trace_geometry(top, mid, broken, basis); }) == ErrorCode::OrderViolation);
}

TEST_CASE("quadrature oracle") {
  const auto g2 = ground(2);
  const TraceGeometry geom = geometry(RationalMatrix{{1, 0}}, RationalMatrix{{1}, {0}});
  const auto cmp = compare_with_oracle(g2, geom, 64, 8.0);
  CHECK(cmp.max_relative_error <= 1e-4);
  CHECK(cmp.samples == 64);

  // Product state: the traced factor contributes trace ≈ 1.
  const auto samples = oracle_sample_points(1, 8);
  const auto quad = quadrature_partial_trace(g2, geom, 64, 8.0, samples);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Complex exact = ground(1).value(samples[i].x, samples[i].y);
    CHECK(std::abs(quad[i] / exact - 1.0) < 1e-6);
  }
  CHECK(code_of([&] { quadrature_partial_trace(g2, geom, 64, 1.0, samples); }) == ErrorCode::ExtentTooSmall);
  CHECK(code_of([&] { quadrature_partial_trace(g2, geom, 8, 8.0, samples); }) == ErrorCode::MalformedInput);
}

TEST_CASE("positivity on a grid") {
  CHECK(min_grid_eigenvalue(ground(1), 64, 8.0) >= -1e-12);
  CHECK(min_grid_eigenvalue(random_mixture(2, 3, 5), 24, 8.0) >= -1e-8);
}

TEST_CASE("coherent families") {
  const dpg::System sys = dpg::generate_random_system({3, 3, 4});
  const auto basis = dpg::evaluation_basis(sys);
  const auto chain = dpg::generated_chain(sys);
  CoherentFamily fam;
  for (const auto& id : chain) fam.labels.push_back(dpg::to_system_label(sys, sys.label(id)));
  for (const auto& rel : sys.order) {
    const bool in = std::count(chain.begin(), chain.end(), rel.upper) && std::count(chain.begin(), chain.end(), rel.lower);
    if (in) fam.order.push_back(rel);
  }
  auto rho = random_mixture(fam.labels[0].frame.size(), 3, 8);
  fam.states[chain[0]] = rho;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const auto w = *derive_order_witness(fam.labels[0], fam.labels[i], basis);
    fam.states[chain[i]] = project_state(rho, fam.labels[0], fam.labels[i], w, basis).state;
  }
  CHECK(check_coherent_family(fam, basis, 1e-9).pass());

  CoherentFamily tampered = fam;
  tampered.states[chain[2]] = random_mixture(fam.labels[2].frame.size(), 1, 99);
  const auto r = check_coherent_family(tampered, basis, 1e-9);
  CHECK_FALSE(r.pass());
  for (const auto& p : r.pairs)
    if (!p.pass) CHECK(p.lower == chain[2]);

  CoherentFamily single;
  single.labels = {fam.labels[0]};
  single.states[chain[0]] = rho;
  CHECK(check_coherent_family(single, basis, 1e-9).pass());
}
