#include <cmath>
#include <vector>

#include "doctest.h"
#include "hnabem/specfun.hpp"

using namespace hnabem;
namespace sf = hnabem::specfun;

namespace {

// Independent oracle: alternating ascending series in long double.
long double series_j(int n, long double x) {
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= x / (2.0L * i);
  long double sum = term;
  const long double q = -x * x / 4.0L;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<long double>(m) * (m + n));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
  }
  return sum;
}

cplx std_hankel(int n, double x) { return {std::cyl_bessel_j(double(n), x), std::cyl_neumann(double(n), x)}; }

}  // namespace

TEST_CASE("J0 and J1 at small arguments") {
  CHECK(sf::bessel_j0(0.0) == 1.0);
  CHECK(sf::bessel_j(0, 0.0) == 1.0);
  CHECK(sf::bessel_j(3, 0.0) == 0.0);
  CHECK(sf::bessel_j0(1.0) == doctest::Approx(0.7651976866).epsilon(1e-10));
  CHECK(sf::bessel_j1(1.0) == doctest::Approx(0.4400505857).epsilon(1e-10));
  for (double x : {1e-3, 0.1, 0.5, 1.0, 2.5, 5.0, 8.0, 11.9}) {
    CHECK(sf::bessel_j0(x) == doctest::Approx(double(series_j(0, x))).epsilon(1e-13));
    CHECK(sf::bessel_j1(x) == doctest::Approx(double(series_j(1, x))).epsilon(1e-13));
  }
}

TEST_CASE("Hankel values at x = 1") {
  const cplx h0 = sf::hankel1(0, 1.0);
  const cplx h1 = sf::hankel1(1, 1.0);
  CHECK(h0.real() == doctest::Approx(0.7651976866).epsilon(1e-10));
  CHECK(h0.imag() == doctest::Approx(0.0882569642).epsilon(1e-9));
  CHECK(h1.real() == doctest::Approx(0.4400505857).epsilon(1e-10));
  CHECK(h1.imag() == doctest::Approx(-0.7812128213).epsilon(1e-10));
}

TEST_CASE("hankel1 rejects non-positive arguments and out-of-range orders") {
  CHECK_THROWS_AS(sf::hankel1(0, 0.0), DomainError);
  CHECK_THROWS_AS(sf::hankel1(1, -1.0), DomainError);
  CHECK_THROWS_AS(sf::hankel1(2, 0.0), DomainError);
  CHECK_THROWS_AS(sf::hankel1(201, 1.0), DomainError);
  CHECK_THROWS_AS(sf::bessel_j(201, 1.0), DomainError);
  CHECK_THROWS_AS(sf::bessel_j(0, -1.0), DomainError);
}

TEST_CASE("small argument behaviour of H0") {
  for (double x : {1e-6, 1e-9, 1e-12}) {
    const cplx h = sf::hankel1(0, x);
    CHECK(h.real() == doctest::Approx(1.0).epsilon(1e-10));
    const double lead = 2.0 / pi * (std::log(x / 2.0) + 0.57721566490153286);
    CHECK(h.imag() == doctest::Approx(lead).epsilon(1e-10));
  }
}

TEST_CASE("agreement with the standard library on a log grid") {
  double worst = 0.0;
  for (int i = 0; i <= 120; ++i) {
    const double x = std::pow(10.0, -3.0 + 6.0 * i / 120.0);
    for (int n = 0; n <= 1; ++n) {
      const cplx ref = std_hankel(n, x);
      const cplx h = sf::hankel1(n, x);
      worst = std::max(worst, std::abs(h - ref) / std::abs(ref));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("series and asymptotic branches agree at the switch point") {
  const double below = std::nextafter(sf::series_switch, 0.0);
  for (int n = 0; n <= 1; ++n) {
    const cplx a = sf::hankel1(n, below);
    const cplx b = sf::hankel1(n, sf::series_switch);
    CHECK(std::abs(a - b) < 1e-11 * std::abs(b));
  }
}

TEST_CASE("Wronskian J1 Y0 - J0 Y1 = 2/(pi x)") {
  for (int i = 0; i <= 60; ++i) {
    const double x = 0.1 * std::pow(1000.0, i / 60.0);
    const double w = sf::bessel_j1(x) * sf::bessel_y0(x) - sf::bessel_j0(x) * sf::bessel_y1(x);
    CHECK(w == doctest::Approx(2.0 / (pi * x)).epsilon(1e-9));
  }
}

TEST_CASE("large argument modulus of H0") {
  for (double x : {100.0, 1e3, 1e4, 1e5}) CHECK(std::abs(std::abs(sf::hankel1(0, x)) * std::sqrt(pi * x / 2.0) - 1.0) < 0.01);
}

TEST_CASE("integer order J against the standard library") {
  for (int n : {2, 3, 5, 10, 20, 50, 100, 200}) {
    for (double x : {0.5, 1.0, 3.0, 10.0, 25.0, 50.0, 150.0, 1000.0}) {
      const double ref = std::cyl_bessel_j(double(n), x);
      const double got = sf::bessel_j(n, x);
      if (std::fabs(ref) < 1e-280) continue;
      // relative to the local envelope in the oscillatory regime
      const double scale = x > n ? std::max(std::fabs(ref), std::sqrt(2.0 / (pi * x))) : std::fabs(ref);
      const double tol = x <= 50.0 ? 1e-12 : 1e-10;
      CHECK_MESSAGE(std::fabs(got - ref) <= tol * scale,
                    "n=" << n << " x=" << x << " got " << got << " ref " << ref);
    }
  }
}

TEST_CASE("derivative identity J0' = -J1") {
  for (double x : {0.3, 1.0, 7.0, 30.0}) {
    CHECK(sf::bessel_j_prime(0, x) == doctest::Approx(-sf::bessel_j1(x)).epsilon(1e-13));
    const double d = sf::bessel_j_prime(3, x);
    CHECK(d == doctest::Approx(0.5 * (sf::bessel_j(2, x) - sf::bessel_j(4, x))).epsilon(1e-12));
  }
}

TEST_CASE("integer order Y against the standard library") {
  for (int n : {2, 3, 5, 10, 25}) {
    for (double x : {0.5, 2.0, 7.5, 13.0, 40.0, 150.0}) {
      const double ref = std::cyl_neumann(double(n), x);
      const double scale = std::max(std::fabs(ref), std::sqrt(2.0 / (pi * x)));
      CHECK_MESSAGE(std::fabs(sf::bessel_y(n, x) - ref) < 1e-12 * scale, "n = " << n << ", x = " << x);
    }
  }
  CHECK(sf::hankel1(4, 3.0).real() == doctest::Approx(std::cyl_bessel_j(4.0, 3.0)).epsilon(1e-12));
  CHECK(sf::hankel1(4, 3.0).imag() == doctest::Approx(std::cyl_neumann(4.0, 3.0)).epsilon(1e-12));
  // Wronskian at higher order: J_{n+1} Y_n - J_n Y_{n+1} = 2/(pi x)
  for (double x : {0.7, 6.0, 30.0}) {
    const int n = 6;
    const double w = sf::bessel_j(n + 1, x) * sf::bessel_y(n, x) - sf::bessel_j(n, x) * sf::bessel_y(n + 1, x);
    CHECK(w == doctest::Approx(2.0 / (pi * x)).epsilon(1e-10));
  }
}
