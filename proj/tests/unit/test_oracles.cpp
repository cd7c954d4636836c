#include <cmath>

#include "doctest.h"
#include "hnabem/oracles.hpp"
#include "hnabem/quadrature.hpp"
#include "hnabem/specfun.hpp"

using namespace hnabem;
using specfun::bessel_j;

namespace {

// Relative L2 distance between a boundary density and a function of the polar
// angle, by Gauss rules on each side.
double relative_l2_vs_angle(const BoundaryDensity& d, const std::function<cplx(double)>& f) {
  const QuadRule& g = gauss_rule(12);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < d.boundary().size(); ++j) {
    const Segment& side = d.boundary().sides[j];
    for (int q = 0; q < g.size(); ++q) {
      const double s = 0.5 * side.length * (g.nodes[q] + 1.0);
      const double w = 0.5 * side.length * g.weights[q];
      const Vec2 x = side.point(s);
      const cplx exact = f(std::atan2(x.y(), x.x()));
      num += w * std::norm(d(j, s) - exact);
      den += w * std::norm(exact);
    }
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("reference sizes") {
  const Screen screen(2.0 * pi);
  CHECK(standard_bem_size(screen.boundary(), 5.0, 10.0) == 50);
  CHECK(standard_bem_size(screen.boundary(), 5.0, 20.0) == 100);

  const auto uniform = standard_bem_mesh(screen.boundary(), 5.0, 10.0, ReferenceOptions{0, 0});
  CHECK(uniform.size() == 50);
  for (const auto& e : uniform) CHECK(e.b - e.a == doctest::Approx(2.0 * pi / 50).epsilon(1e-12));

  const auto graded = standard_bem_mesh(screen.boundary(), 5.0, 10.0);
  long dofs = 0;
  for (const auto& e : graded) dofs += e.size();
  CHECK(dofs >= 50);
  CHECK(graded.front().a == 0.0);
  CHECK(graded.back().b == 2.0 * pi);
  CHECK(graded.front().b < 1e-8);

  CHECK_THROWS_AS(standard_bem_size(screen.boundary(), 5.0, 5.0), ConfigError);
  CHECK_THROWS_AS(standard_bem_mesh(screen.boundary(), 5.0, 10.0, ReferenceOptions{0, 0, 1.5}), ConfigError);
}

TEST_CASE("reference refuses oversized problems") {
  const Screen screen(2.0 * pi);
  const Incidence inc = Incidence::from_angle(5000.0, pi / 6);
  try {
    standard_bem_reference(screen, inc, 10.0, ReferenceOptions{0, 0});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("50000") != std::string::npos);
  }
}

TEST_CASE("screen reference self-convergence") {
  const Screen screen(2.0 * pi);
  const Incidence inc = Incidence::from_angle(5.0, pi / 6);
  const auto coarse = standard_bem_reference(screen, inc, 10.0);
  const auto fine = standard_bem_reference(screen, inc, 20.0);
  CHECK(fine.report.cond > 1.0);
  CHECK(fine.reference.samples.size() > coarse.reference.samples.size());
  CHECK(relative_error(coarse.neumann, fine.neumann, Norm::L2) < 1e-2);
}

TEST_CASE("polygon reference approaches the disk") {
  const double k = 2.0;
  const Vec2 dir(0.0, -1.0);
  const Incidence inc(k, dir);
  auto error_for = [&](int sides) {
    const auto ref = standard_bem_reference(make_regular_polygon(sides, 1.0), inc, 10.0, ReferenceOptions{2, 0});
    return relative_l2_vs_angle(ref.neumann,
                                [&](double theta) { return disk_scattering_neumann(k, 1.0, dir, theta); });
  };
  const double e64 = error_for(64);
  const double e128 = error_for(128);
  // the corners perturb the density at first order in the side angle
  CHECK(e128 < 2e-2);
  CHECK(e64 < 3e-2);
  CHECK(e64 / e128 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("disk series") {
  // -J_1(1)/J_0(1), evaluated independently in extended precision
  CHECK(disk_dtn_eigenvalue(1.0, 1.0, 0) == doctest::Approx(-0.5750809150043059).epsilon(1e-12));
  // k J_1'(k)/J_1(k) at k = 1 from the recurrence J_1' = J_0 - J_1
  CHECK(disk_dtn_eigenvalue(1.0, 1.0, 1) ==
        doctest::Approx((bessel_j(0, 1.0) - bessel_j(1, 1.0)) / bessel_j(1, 1.0)).epsilon(1e-12));
  CHECK(disk_dtn_eigenvalue(1.0, 1.0, -3) == doctest::Approx(disk_dtn_eigenvalue(1.0, 1.0, 3)).epsilon(1e-12));
  CHECK_THROWS_AS(disk_dtn_eigenvalue(2.404825557695773, 1.0, 0), DomainError);

  SUBCASE("constant mode has constant Neumann data") {
    const DiskSeries u = DiskSeries::mode(1.0, 1.0, 0);
    const ReferenceSolution r = u.circle_neumann(16);
    REQUIRE(r.samples.size() == 16);
    for (const auto& s : r.samples) {
      CHECK(s.value.real() == doctest::Approx(-0.5750809150043059).epsilon(1e-12));
      CHECK(std::abs(s.value.imag()) < 1e-14);
    }
  }

  SUBCASE("modes take unit boundary values") {
    for (int m : {-4, -1, 2, 5}) {
      const DiskSeries u = DiskSeries::mode(3.0, 1.5, m);
      for (double t : {0.0, 0.7, 2.5, -1.9}) {
        const Vec2 x(1.5 * std::cos(t), 1.5 * std::sin(t));
        const cplx want = std::exp(I * (m * t));
        CHECK(std::abs(u.value(x) - want) < 1e-12);
      }
    }
  }

  SUBCASE("gradient matches finite differences") {
    const DiskSeries u = DiskSeries::mode(2.0, 1.0, 3);
    const Vec2 x(0.31, -0.42);
    const double h = 1e-5;
    const cplx dx = (u.value(x + Vec2(h, 0)) - u.value(x - Vec2(h, 0))) / (2 * h);
    const cplx dy = (u.value(x + Vec2(0, h)) - u.value(x - Vec2(0, h))) / (2 * h);
    const Eigen::Vector2cd g = u.gradient(x);
    CHECK(std::abs(g[0] - dx) < 1e-8);
    CHECK(std::abs(g[1] - dy) < 1e-8);
    CHECK(std::abs(u.gradient(Vec2(0, 0)).norm()) < 1e-15);
  }

  SUBCASE("Jacobi-Anger expansion of a plane wave") {
    const double k = 7.0;
    const Vec2 d = Vec2(0.6, -0.8);
    const DiskSeries u = DiskSeries::plane_wave(k, 1.0, d);
    CHECK(u.truncation() == 27);
    for (const Vec2& x : {Vec2(0, 0), Vec2(0.3, 0.5), Vec2(-0.7, 0.7), Vec2(1.0, 0.0)}) {
      const cplx exact = std::exp(I * k * x.dot(d));
      CHECK(std::abs(u.value(x) - exact) < 1e-10);
      const Eigen::Vector2cd g = u.gradient(x);
      CHECK(std::abs(g[0] - I * k * d.x() * exact) < 1e-9);
      CHECK(std::abs(g[1] - I * k * d.y() * exact) < 1e-9);
    }
  }
}

TEST_CASE("polygon DtN eigenvalues approach the disk") {
  const double k = 1.0;
  const ConvexPolygon poly = make_regular_polygon(128, 1.0);
  const std::vector<int> modes{0, 1, 2, 3, 4, 5};
  const std::vector<cplx> lambda = polygon_dtn_eigenvalues(poly, k, modes, 1);
  REQUIRE(lambda.size() == modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double exact = disk_dtn_eigenvalue(k, 1.0, modes[i]);
    INFO("m = " << modes[i] << ", estimate " << lambda[i]);
    CHECK(std::abs(lambda[i] - exact) < 2e-2 * std::abs(exact));
  }
  CHECK_THROWS_AS(polygon_dtn_eigenvalues(poly, k, modes, 0), ConfigError);
}

TEST_CASE("flat grating") {
  const FlatGratingSolution normal = flat_grating_exact(1.0, 0.0, 2.0 * pi);
  CHECK(normal.alpha0 == doctest::Approx(0.0));
  CHECK(normal.beta0 == doctest::Approx(1.0));
  CHECK(std::abs(normal.neumann(0.0) - cplx(0.0, -2.0)) < 1e-15);
  CHECK(std::abs(normal.neumann(1.3) - cplx(0.0, -2.0)) < 1e-15);
  CHECK(normal.coefficients.at(0) == cplx(-1.0, 0.0));
  CHECK(normal.reference.samples.size() == 64);

  const FlatGratingSolution oblique = flat_grating_exact(2.0, pi / 5, 3.0);
  double energy = 0.0;
  for (const auto& [n, c] : oblique.coefficients) {
    const double alpha = oblique.alpha0 + 2.0 * pi * n / (oblique.k * oblique.period);
    if (alpha * alpha < 1.0) energy += std::sqrt(1.0 - alpha * alpha) / oblique.beta0 * std::norm(c);
  }
  CHECK(energy == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(oblique.neumann(0.0)) == doctest::Approx(2.0 * 2.0 * oblique.beta0));
}
