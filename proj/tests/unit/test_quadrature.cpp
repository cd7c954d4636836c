#include <cmath>

#include "doctest.h"
#include "hnabem/quadrature.hpp"

using namespace hnabem;

TEST_CASE("low-order Gauss rules") {
  const QuadRule& g1 = gauss_rule(1);
  CHECK(g1.nodes[0] == 0.0);
  CHECK(g1.weights[0] == 2.0);
  const QuadRule& g2 = gauss_rule(2);
  CHECK(g2.nodes[0] == doctest::Approx(-0.5773502692));
  CHECK(g2.nodes[1] == doctest::Approx(0.5773502692));
  CHECK(g2.weights[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(gauss_rule(0), ConfigError);
  CHECK_THROWS_AS(gauss_rule(65), ConfigError);
}

TEST_CASE("Gauss exactness") {
  for (int q = 1; q <= 64; ++q) {
    const QuadRule& g = gauss_rule(q);
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    CHECK(std::fabs(wsum - 2.0) < 1e-13);
    for (int d = 0; d <= 2 * q - 1; d += 1 + (q > 10 ? 7 : 0)) {
      double s = 0.0;
      for (int i = 0; i < q; ++i) s += g.weights[i] * std::pow(g.nodes[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(std::fabs(s - exact) <= 1e-13 * std::max(1.0, exact));
    }
  }
  const QuadRule& g5 = gauss_rule(5);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += g5.weights[i] * std::pow(g5.nodes[i], 9);
  CHECK(std::fabs(s) < 1e-14);
}

TEST_CASE("graded integration of endpoint singularities") {
  auto lg = [](double t) { return cplx(std::log(t)); };
  auto isqrt = [](double t) { return cplx(1.0 / std::sqrt(t)); };
  auto corner = [](double t) { return cplx(std::pow(t, -0.4)); };
  CHECK(std::abs(integrate_graded(lg, 0.0, 1.0, true, false, 20, 0.15, 10) + 1.0) < 1e-8);
  CHECK(std::abs(integrate_graded(isqrt, 0.0, 1.0, true, false, 20, 0.15, 10) - 2.0) < 1e-8);
  CHECK(std::abs(integrate_graded(corner, 0.0, 1.0, true, false, 20, 0.15, 10) - 5.0 / 3.0) < 1e-8);
  auto both = [](double t) { return cplx(std::pow(t * (1.0 - t), -0.4)); };
  // B(0.6, 0.6)
  const double beta = std::tgamma(0.6) * std::tgamma(0.6) / std::tgamma(1.2);
  CHECK(std::abs(integrate_graded(both, 0.0, 1.0, true, true, 20, 0.15, 10) - beta) < 1e-8);
}

TEST_CASE("integrate_graded errors") {
  auto nan = [](double) { return cplx(std::nan("")); };
  CHECK_THROWS_AS(integrate_graded(nan, 0.0, 1.0, false, false, 5, 0.15, 4), NumericalError);
  auto one = [](double) { return cplx(1.0); };
  CHECK_THROWS_AS(integrate_graded(one, 0.0, 1.0, true, false, 5, 1.5, 4), ConfigError);
}

TEST_CASE("oscillatory resolution at 10 points per wavelength") {
  QuadBudget budget;
  for (double kL : {1.0, 10.0, 100.0, 1e3, 1e4}) {
    const double L = 1.0, k = kL / L;
    QuadPoints pts;
    append_oscillatory(0.0, L, k, budget, pts);
    cplx sum = 0.0;
    for (const auto& p : pts) sum += p.weight * std::exp(I * (k * p.position()));
    const cplx exact = (std::exp(I * k * L) - 1.0) / (I * k);
    CHECK_MESSAGE(std::abs(sum - exact) < 1e-8, "kL = " << kL);
  }
}

TEST_CASE("graded rules keep offsets from the anchor") {
  QuadBudget budget;
  QuadPoints pts;
  append_graded(3.0, -1.0, 20, 0.0, budget, pts);
  double wsum = 0.0, smallest = 1.0;
  for (const auto& p : pts) {
    CHECK(p.anchor == 3.0);
    CHECK(p.offset < 0.0);
    wsum += p.weight;
    smallest = std::min(smallest, -p.offset);
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(smallest < 1e-17);
}

TEST_CASE("layers from distance") {
  QuadBudget budget;
  CHECK(layers_for_distance(0.0, 1.0, budget) == budget.singular_layers);
  CHECK(layers_for_distance(2.0, 1.0, budget) == 0);
  const int n = layers_for_distance(1e-4, 1.0, budget);
  CHECK(n >= 5);
  CHECK(n <= 7);
}

TEST_CASE("budget validation") {
  QuadBudget b;
  CHECK_NOTHROW(b.validate());
  b.singular_grading = 1.5;
  CHECK_THROWS_AS(b.validate(), ConfigError);
  b = {};
  b.points_per_wavelength = 0.0;
  CHECK_THROWS_AS(b.validate(), ConfigError);
}
