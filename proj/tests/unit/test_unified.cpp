#include <cmath>

#include "doctest.h"
#include "hnabem/oracles.hpp"
#include "hnabem/quadrature.hpp"
#include "hnabem/unified.hpp"

using namespace hnabem;

namespace {

// Weighted samples on a polygon boundary with a rule unrelated to the solver's.
struct Samples {
  std::vector<int> side;
  std::vector<Vec2> x;
  std::vector<double> w;
};

Samples polygon_samples(const ConvexPolygon& poly, int per_side) {
  const QuadRule& g = gauss_rule(per_side);
  Samples out;
  for (int j = 0; j < poly.num_sides(); ++j) {
    const Segment& sd = poly.side(j);
    for (int q = 0; q < g.size(); ++q) {
      const double s = 0.5 * sd.length * (g.nodes[q] + 1.0);
      out.side.push_back(j);
      out.x.push_back(sd.point(s));
      out.w.push_back(0.5 * sd.length * g.weights[q]);
    }
  }
  return out;
}

// Coefficients of the L2-orthogonal projection of `target` onto the span of
// the given waves, through a QR factorization of the weighted sample matrix.
Eigen::VectorXcd qr_projection(const Samples& smp, const std::vector<GeneralizedPlaneWave>& waves,
                               const std::function<cplx(int, const Vec2&)>& target) {
  const int Q = static_cast<int>(smp.x.size()), N = static_cast<int>(waves.size());
  Eigen::MatrixXcd B(Q, N);
  Eigen::VectorXcd b(Q);
  for (int q = 0; q < Q; ++q) {
    const double sw = std::sqrt(smp.w[q]);
    for (int n = 0; n < N; ++n) B(q, n) = sw * waves[n].value(smp.x[q]);
    b[q] = sw * target(smp.side[q], smp.x[q]);
  }
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(B).solve(b);
}

}  // namespace

TEST_CASE("generalized plane waves") {
  const Vec2 x(0.7, -0.2);
  CHECK(std::abs(gpw_eval(0.0, 3.0, x) - std::exp(I * 3.0 * 0.7)) < 1e-15);
  CHECK(std::abs(gpw_eval(pi / 2, 2.0, Vec2(0.0, 1.0)) - std::exp(2.0 * I)) < 1e-15);

  const cplx theta(0.4, 0.9);
  const double k = 1.7;
  const Vec2 y(0.3, 1.1);
  const double modulus = std::exp(-k * (std::cos(theta).imag() * y.x() + std::sin(theta).imag() * y.y()));
  CHECK(std::abs(gpw_eval(theta, k, y)) == doctest::Approx(modulus).epsilon(1e-14));

  for (double t : {0.0, 1.0, 2.5, -2.0}) CHECK(std::abs(gpw_eval(t, 4.0, Vec2(3.0, -8.0))) == doctest::Approx(1.0));

  const Vec2 nu = Vec2(1.0, 2.0).normalized();
  const PlaneWaveSample smp = gpw_eval(theta, k, y, nu);
  const double h = 1e-6;
  const cplx fd = (gpw_eval(theta, k, y + h * nu) - gpw_eval(theta, k, y - h * nu)) / (2 * h);
  CHECK(std::abs(smp.normal_derivative - fd) < 1e-8);
  CHECK(smp.value == gpw_eval(theta, k, y));

  const GeneralizedPlaneWave v(k, theta);
  CHECK(std::abs(v.theta() - theta) < 1e-14);
  const GeneralizedPlaneWave w = GeneralizedPlaneWave::from_direction(k, v.cos_theta(), v.sin_theta());
  CHECK(std::abs(w.value(y) - v.value(y)) < 1e-15);
  CHECK_THROWS_AS(GeneralizedPlaneWave::from_direction(k, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(GeneralizedPlaneWave(0.0, 1.0), ConfigError);
}

TEST_CASE("Rayleigh modes") {
  const RayleighSpectrum normal = rayleigh_modes(1.0, 2.0 * pi, 0.0, -3, 3);
  for (int n = -3; n <= 3; ++n) CHECK(normal.mode(n).alpha == doctest::Approx(n).epsilon(1e-15));
  CHECK(normal.mode(0).beta == cplx(1.0, 0.0));
  CHECK(normal.mode(1).beta == cplx(0.0, 0.0));
  CHECK(normal.mode(1).propagating());
  CHECK(normal.mode(2).beta.real() == 0.0);
  CHECK(normal.mode(2).beta.imag() == doctest::Approx(1.7320508).epsilon(1e-7));
  CHECK(normal.propagating() == std::vector<int>{-1, 0, 1});

  const RayleighSpectrum oblique = rayleigh_modes(1.0, 2.0 * pi, pi / 6, -5, 5);
  CHECK(oblique.mode(0).alpha == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(oblique.mode(0).beta.real() == doctest::Approx(0.8660254).epsilon(1e-7));
  CHECK(oblique.mu == doctest::Approx(0.5));

  const RayleighSpectrum wide = rayleigh_modes(3.3, 1.9, -0.4, -60, 60);
  for (const auto& m : wide.modes) {
    CHECK(std::abs(m.alpha * m.alpha + m.beta * m.beta - 1.0) < 1e-14 * std::max(1.0, m.alpha * m.alpha));
    CHECK(m.beta.real() >= 0.0);
    CHECK(m.beta.imag() >= 0.0);
    CHECK((m.beta.real() == 0.0 || m.beta.imag() == 0.0));
    const GeneralizedPlaneWave v = m.test_wave(3.3);
    CHECK(std::abs(v.cos_theta() + m.alpha) < 1e-15);
  }
  const auto prop = wide.propagating();
  CHECK(!prop.empty());
  CHECK(prop.size() < 10);

  const auto modes = propagating_plus_evanescent(2.0, 2.0 * pi, pi / 10, 4);
  CHECK(modes == std::vector<int>{-2, -1, 0, 1, -3, 2, -4, 3});
  CHECK(symmetric_modes(2) == std::vector<int>{-2, -1, 0, 1, 2});

  CHECK_THROWS_AS(rayleigh_modes(1.0, 2.0 * pi, pi / 2, -1, 1), ConfigError);
  CHECK_THROWS_AS(rayleigh_modes(1.0, 2.0 * pi, 0.0, 2, 1), ConfigError);
  CHECK_THROWS_AS(normal.mode(9), ConfigError);
}

TEST_CASE("interior solver with one direction") {
  const double k = 1.3;
  const ConvexPolygon tri = make_equilateral_triangle(2.0);
  auto h = [](int, double, const Vec2& x) { return cplx(x.x() * x.x(), std::sin(x.y())); };
  const InteriorSolution sol = interior_planewave_galerkin(tri, k, h, {0.7});
  const GeneralizedPlaneWave v(k, 0.7);
  const Samples smp = polygon_samples(tri, 40);
  cplx num = 0.0;
  double den = 0.0;
  for (std::size_t q = 0; q < smp.x.size(); ++q) {
    num += smp.w[q] * h(0, 0.0, smp.x[q]) * std::conj(v.normal_derivative(smp.x[q], tri.side(smp.side[q]).normal));
    den += smp.w[q] * std::norm(v.value(smp.x[q]));
  }
  CHECK(std::abs(sol.density.coefficients[0] - num / den) < 1e-13 * std::abs(num / den));
  CHECK(sol.gram.hermitian);
  CHECK(sol.gram.cond == 1.0);
}

TEST_CASE("interior Galerkin orthogonality for plane-wave data") {
  const double k = 2.0;
  const ConvexPolygon tri = make_equilateral_triangle(2.0);
  const std::vector<cplx> thetas{0.1, 1.2, 2.0, 3.5, 4.4, 5.9};
  const GeneralizedPlaneWave star(k, thetas[2]);
  const InteriorSolution sol =
      interior_planewave_galerkin(tri, k, [&](int, double, const Vec2& x) { return star.value(x); }, thetas);
  const Samples smp = polygon_samples(tri, 40);
  for (const auto& vm : sol.density.waves) {
    cplx r = 0.0;
    for (std::size_t q = 0; q < smp.x.size(); ++q) {
      const Vec2& nu = tri.side(smp.side[q]).normal;
      const cplx phi = sol.density(smp.side[q], (smp.x[q] - tri.side(smp.side[q]).start).norm());
      r += smp.w[q] * (phi - star.normal_derivative(smp.x[q], nu)) * std::conj(vm.value(smp.x[q]));
    }
    CHECK(std::abs(r) < 1e-11);
  }
  CHECK(sol.gram.hermitian_defect < 1e-12);
  CHECK(sol.gram.min_eigenvalue > 0.0);
}

TEST_CASE("interior solver on a disk is the best approximation") {
  const double k = 2.0;
  const ConvexPolygon disk = make_regular_polygon(128, 1.0);
  const Vec2 d(std::cos(0.3), std::sin(0.3));
  const DiskSeries u = DiskSeries::plane_wave(k, 1.0, d);
  auto h = [&](int, double, const Vec2& x) { return u.value(x); };
  auto neumann = [&](int side, double, const Vec2& x) { return u.normal_derivative(x, disk.side(side).normal); };
  const Samples smp = polygon_samples(disk, 24);

  // equispaced sets of consecutive sizes are not nested, so the comparison
  // runs over even N
  double previous = std::numeric_limits<double>::infinity();
  for (int N = 4; N <= 24; N += 2) {
    const InteriorSolution sol = interior_planewave_galerkin(disk, k, h, equispaced_directions(N));
    const double err = sol.density.l2_distance(neumann);
    INFO("N = " << N);
    CHECK(err < previous);
    previous = err;
    CHECK(sol.gram.min_eigenvalue > 0.0);
    if (N == 16) {
      const Eigen::VectorXcd c = qr_projection(smp, sol.density.waves, [&](int side, const Vec2& x) {
        return u.normal_derivative(x, disk.side(side).normal);
      });
      CHECK((c - sol.density.coefficients).cwiseAbs().maxCoeff() < 1e-8 * c.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("interior Gram spectrum against extended-precision values") {
  // Smallest and largest eigenvalues of the exact Gram matrix of N equispaced
  // plane waves (k = 2) on the unit 128-gon, from closed-form side integrals
  // evaluated with 40 significant digits.
  struct Row {
    int N;
    double lmin, lmax;
  };
  const ConvexPolygon disk = make_regular_polygon(128, 1.0);
  auto zero = [](int, double, const Vec2&) { return cplx(0.0); };
  for (const Row& r : {Row{4, 1.3203, 8.778}, Row{12, 2.1751e-4, 25.078}, Row{16, 9.8591e-8, 33.437},
                       Row{24, 1.1211e-15, 50.156}}) {
    const InteriorSolution sol = interior_planewave_galerkin(disk, 2.0, zero, equispaced_directions(r.N));
    INFO("N = " << r.N);
    // the floor is the extended-precision resolution relative to lmax
    CHECK(std::abs(sol.gram.min_eigenvalue - r.lmin) < 2e-4 * r.lmin + 1e-17);
    CHECK(std::abs(sol.gram.min_eigenvalue * sol.gram.cond - r.lmax) < 2e-4 * r.lmax);
  }
}

TEST_CASE("projection error does not grow as directions are added") {
  const double k = 3.0;
  const ConvexPolygon tri = make_equilateral_triangle(1.5);
  const Vec2 d(0.6, 0.8);
  auto h = [&](int, double, const Vec2& x) { return std::exp(I * k * x.dot(d)); };
  auto neumann = [&](int side, double, const Vec2& x) {
    return I * k * d.dot(tri.side(side).normal) * std::exp(I * k * x.dot(d));
  };
  std::vector<cplx> thetas;
  double previous = std::numeric_limits<double>::infinity();
  for (int n = 0; n < 14; ++n) {
    thetas.emplace_back(std::fmod(2.399963229728653 * n, 2.0 * pi), 0.0);  // golden-angle sequence
    const double err = interior_planewave_galerkin(tri, k, h, thetas).density.l2_distance(neumann);
    CHECK(err <= previous * (1.0 + 1e-12));
    previous = err;
  }
}

TEST_CASE("interior solver guards") {
  const ConvexPolygon tri = make_equilateral_triangle(1.0);
  auto h = [](int, double, const Vec2&) { return cplx(1.0); };
  CHECK_THROWS_AS(interior_planewave_galerkin(tri, 1.0, h, {0.5, 0.5 + 2.0 * pi}), ConfigError);
  CHECK_THROWS_AS(interior_planewave_galerkin(tri, 1.0, h, {}), ConfigError);
  CHECK_THROWS_AS(interior_planewave_galerkin(tri, -1.0, h, {0.5}), ConfigError);
  // many directions on a small domain are numerically dependent
  try {
    interior_planewave_galerkin(tri, 1.0, h, equispaced_directions(40));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("condition") != std::string::npos);
  }
  // complex directions are admitted
  const InteriorSolution sol = interior_planewave_galerkin(tri, 1.0, h, {cplx(0.2, 0.3), cplx(2.0, -0.4), 4.0});
  CHECK(sol.gram.min_eigenvalue > 0.0);
  CHECK(sol.gram.hermitian_defect < 1e-12);
}

TEST_CASE("flat grating") {
  const GratingProfile flat = GratingProfile::flat(2.0 * pi);

  SUBCASE("single mode at normal incidence") {
    const double k = 1.0;
    const GratingSolution sol = grating_assemble_solve(GratingMethod::SSstar, flat, k, 0.0, {0});
    for (double x : {0.0, 1.0, 4.0}) CHECK(std::abs(sol.density(x) - cplx(0.0, -2.0)) < 1e-13);
  }

  SUBCASE("oblique incidence recovers the exact solution") {
    const double k = 2.5, theta = pi / 6;
    const FlatGratingSolution exact = flat_grating_exact(k, theta, 2.0 * pi);
    const GratingSolution sol = grating_assemble_solve(GratingMethod::SSstar, flat, k, theta, symmetric_modes(2));
    CHECK(sol.system.hermitian);
    CHECK(sol.system.min_eigenvalue > 0.0);
    const double err = grating_l2_norm(flat, [&](double x) { return sol.density(x) - exact.neumann(x); }, 10.0);
    CHECK(err < 1e-10);
    const RayleighCoefficients rc = rayleigh_coefficients(sol.density, -4, 4);
    CHECK(std::abs(rc.c.at(0) + 1.0) < 1e-12);
    for (const auto& [n, c] : rc.c)
      if (n != 0) CHECK(std::abs(c) < 1e-12);
    CHECK(energy_balance(rc) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("SS* equals the orthogonal projection of the exact density") {
    const double k = 1.7, theta = -0.4;
    const FlatGratingSolution exact = flat_grating_exact(k, theta, 2.0 * pi);
    const std::vector<int> modes{-3, -1, 0, 2, 4};
    const GratingSolution sol = grating_assemble_solve(GratingMethod::SSstar, flat, k, theta, modes);
    const QuadRule& g = gauss_rule(30);
    const int panels = 12;
    Eigen::MatrixXcd B(panels * g.size(), modes.size());
    Eigen::VectorXcd b(panels * g.size());
    for (int p = 0; p < panels; ++p)
      for (int q = 0; q < g.size(); ++q) {
        const double h = 2.0 * pi / panels, x = (p + 0.5 * (g.nodes[q] + 1.0)) * h;
        const double sw = std::sqrt(0.5 * h * g.weights[q]);
        for (std::size_t m = 0; m < modes.size(); ++m) {
          const RayleighMode rm = rayleigh_mode(k, 2.0 * pi, theta, modes[m]);
          B(p * g.size() + q, m) = sw * std::conj(rm.test_wave(k).value(Vec2(x, 0.0)));
        }
        b[p * g.size() + q] = sw * exact.neumann(x);
      }
    const Eigen::VectorXcd c = Eigen::HouseholderQR<Eigen::MatrixXcd>(B).solve(b);
    CHECK((c - sol.density.coefficients).cwiseAbs().maxCoeff() < 1e-8);
  }

  SUBCASE("pulse and spectral bases at normal incidence") {
    for (GratingMethod m : {GratingMethod::SC, GratingMethod::SS}) {
      const GratingSolution sol = grating_assemble_solve(m, flat, 1.5, 0.0, symmetric_modes(2));
      CHECK(!sol.system.hermitian);
      for (double x : {0.1, 2.0, 5.5}) CHECK(std::abs(sol.density(x) - cplx(0.0, -3.0)) < 1e-10);
    }
  }

  SUBCASE("the published right-hand side is off by 1/beta_0") {
    const double k = 2.0, theta = pi / 4;
    GratingOptions opt;
    opt.rhs = GratingRhs::Published;
    const GratingSolution sol = grating_assemble_solve(GratingMethod::SSstar, flat, k, theta, symmetric_modes(1), opt);
    const RayleighCoefficients rc = rayleigh_coefficients(sol.density, -1, 1);
    CHECK(std::abs(rc.c.at(0) + 1.0 / std::cos(theta)) < 1e-12);
  }
}

TEST_CASE("sinusoidal grating") {
  const double L = 2.0 * pi, k = 2.0, theta = pi / 10;
  const GratingProfile profile = GratingProfile::sinusoid(L, 0.1 * L);

  const auto propagating = propagating_plus_evanescent(k, L, theta, 0);
  const GratingSolution base = grating_assemble_solve(GratingMethod::SSstar, profile, k, theta, propagating);
  CHECK(base.n_propagating == 4);
  CHECK(base.report.cond < 1e3);

  double previous = base.report.cond;
  for (int extra = 1; extra <= 8; ++extra) {
    const auto modes = propagating_plus_evanescent(k, L, theta, extra);
    const GratingSolution sol = grating_assemble_solve(GratingMethod::SSstar, profile, k, theta, modes);
    CHECK(sol.system.hermitian_defect < 1e-12);
    CHECK(sol.system.min_eigenvalue > 0.0);
    CHECK(sol.report.cond > previous);
    previous = sol.report.cond;
  }

  const GratingSolution fine =
      grating_assemble_solve(GratingMethod::SSstar, profile, k, theta, propagating_plus_evanescent(k, L, theta, 10));
  const RayleighCoefficients rc = rayleigh_coefficients(fine.density, -6, 6);
  CHECK(std::abs(energy_balance(rc) - 1.0) < 1e-3);
  for (int n : rc.spectrum.propagating()) CHECK(rc.efficiency(n) >= 0.0);

  const GratingSolution coarse = grating_assemble_solve(GratingMethod::SSstar, profile, k, theta, {0});
  CHECK(std::abs(energy_balance(rayleigh_coefficients(coarse.density, -6, 6)) - 1.0) > 1e-2);

  const double mu = k * std::sin(theta);
  for (const GratingSolution* s : {&fine, &coarse})
    for (double x : {0.3, 1.7, 4.9}) {
      const cplx a = s->density(x + L), b = std::exp(I * mu * L) * s->density(x);
      CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(b)));
    }

  const GratingSolution sc = grating_assemble_solve(GratingMethod::SC, profile, k, theta, symmetric_modes(6));
  CHECK(std::abs(sc.density(1.0 + L) - std::exp(I * mu * L) * sc.density(1.0)) < 1e-12 * std::abs(sc.density(1.0)));
}

TEST_CASE("Rayleigh coefficient extraction") {
  const GratingProfile flat = GratingProfile::flat(2.0 * pi);
  const RayleighSpectrum spectrum = rayleigh_modes(1.3, 2.0 * pi, 0.2, -3, 3);
  const RayleighCoefficients zero = rayleigh_coefficients([](double) { return cplx(0.0); }, flat, spectrum);
  for (const auto& [n, c] : zero.c) CHECK(c == cplx(0.0));
  CHECK(energy_balance(zero) == 0.0);

  const FlatGratingSolution exact = flat_grating_exact(1.3, 0.2, 2.0 * pi);
  const RayleighCoefficients rc =
      rayleigh_coefficients([&](double x) { return exact.neumann(x); }, flat, spectrum);
  CHECK(std::abs(rc.c.at(0) + 1.0) < 1e-12);
  CHECK(energy_balance(rc) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rc.efficiency(3) == 0.0);

  const RayleighSpectrum grazing = rayleigh_modes(1.0, 2.0 * pi, 0.0, -1, 1);
  CHECK_THROWS_AS(rayleigh_coefficients([](double) { return cplx(1.0); }, flat, grazing), DomainError);
}

TEST_CASE("grating guards") {
  const GratingProfile flat = GratingProfile::flat(1.0);
  CHECK_THROWS_AS(grating_assemble_solve(GratingMethod::SSstar, flat, 1.0, 0.0, {1, 2}), ConfigError);
  CHECK_THROWS_AS(grating_assemble_solve(GratingMethod::SSstar, flat, 1.0, 0.0, {0, 0}), ConfigError);
  CHECK_THROWS_AS(grating_assemble_solve(GratingMethod::SSstar, flat, 1.0, 2.0, {0}), ConfigError);
  CHECK_THROWS_AS(grating_assemble_solve(GratingMethod::SSstar, flat, 1.0, 0.0, {}), ConfigError);
  CHECK(parse_grating_method("SSstar") == GratingMethod::SSstar);
  CHECK(parse_grating_method("SC") == GratingMethod::SC);
  CHECK_THROWS_AS(parse_grating_method("XX"), ConfigError);
  CHECK(std::string(to_string(GratingMethod::SS)) == "SS");
}
