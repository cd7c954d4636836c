#include "hnabem/specfun.hpp"

#include <cmath>
#include <string>
#include <type_traits>

namespace hnabem::specfun {
namespace {

constexpr long double euler_gamma = 0.577215664901532860606512090082402431L;
constexpr long double pi_l = 3.141592653589793238462643383279502884L;

struct SmallArg {
  double j0, j1, y0, y1;
};

constexpr int series_terms = 80;

struct SeriesTables {
  long double r0[series_terms];  // 1/((m+1)^2)
  long double r1[series_terms];  // 1/((m+1)(m+2))
  long double h[series_terms + 1];  // harmonic numbers H_m
  double inv[series_terms];           // 1/(m+1)
  SeriesTables() {
    h[0] = 0.0L;
    for (int m = 0; m < series_terms; ++m) {
      inv[m] = 1.0 / (m + 1.0);
      r0[m] = 1.0L / ((m + 1.0L) * (m + 1.0L));
      r1[m] = 1.0L / ((m + 1.0L) * (m + 2.0L));
      h[m + 1] = h[m] + 1.0L / (m + 1.0L);
    }
  }
};

const SeriesTables& tables() {
  static const SeriesTables t;
  return t;
}

// Ascending series. Terms grow to at most ~1e4 for x < 12, so extended
// precision is used above x = 4 to keep the cancellation error near 1e-15;
// below that double precision loses nothing.
template <typename Real>
SmallArg small_argument_impl(double xd, bool want_y) {
  const SeriesTables& tb = tables();
  const Real x = xd;
  const Real q = x * x / Real(4);
  Real t0 = 1;      // (x^2/4)^m / (m!)^2
  Real t1 = x / 2;  // (x/2)^(2m+1) / (m! (m+1)!)
  Real j0 = 0, j1 = 0, s0 = 0, s1 = 0;
  Real sign = 1;
  const Real tiny = std::is_same_v<Real, double> ? Real(1e-17) : Real(1e-19L);
  for (int m = 0; m < series_terms; ++m) {
    j0 += sign * t0;
    j1 += sign * t1;
    if (want_y) {
      s0 -= sign * Real(tb.h[m]) * t0;
      s1 += sign * Real(tb.h[m] + tb.h[m + 1]) * t1;
    }
    if (m > 2 && t0 < tiny && t1 < tiny) break;
    t0 *= q * Real(tb.r0[m]);
    t1 *= q * Real(tb.r1[m]);
    sign = -sign;
  }
  SmallArg out{static_cast<double>(j0), static_cast<double>(j1), 0.0, 0.0};
  if (want_y) {
    const double lg = std::log(0.5 * xd);
    const Real two_over_pi = Real(2.0L / pi_l);
    out.y0 = static_cast<double>(two_over_pi * ((Real(lg) + Real(euler_gamma)) * j0 + s0));
    // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1 - (1/pi) sum (-1)^m (psi(m+1)+psi(m+2)) t1,
    // psi(m+1) = -gamma + H_m.
    out.y1 = static_cast<double>(-two_over_pi / x + two_over_pi * Real(lg) * j1 -
                                 (s1 - Real(2) * Real(euler_gamma) * j1) / Real(pi_l));
  }
  return out;
}

SmallArg small_argument(double x, bool want_y) {
  return x < 4.0 ? small_argument_impl<double>(x, want_y) : small_argument_impl<long double>(x, want_y);
}

// sum_k i^k a_k(nu) / x^k, truncated at the smallest term.
cplx asymptotic_sum(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  const double inv8x = 1.0 / (8.0 * x);
  const SeriesTables& tb = tables();
  double re = 1.0, im = 0.0;
  double a = 1.0, prev = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double next = a * (mu - (2.0 * k + 1) * (2.0 * k + 1)) * inv8x * tb.inv[k];
    const double mag = std::fabs(next);
    if (mag > prev) break;
    // i^(k+1)
    switch ((k + 1) & 3) {
      case 0: re += next; break;
      case 1: im += next; break;
      case 2: re -= next; break;
      case 3: im -= next; break;
    }
    prev = mag;
    a = next;
    if (prev < 1e-17) break;
  }
  return {re, im};
}

cplx hankel_asymptotic(int nu, double x) {
  const double phase = x - nu * pi / 2.0 - pi / 4.0;
  return std::sqrt(2.0 / (pi * x)) * std::polar(1.0, phase) * asymptotic_sum(nu, x);
}

void check_argument(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bessel: argument must be finite and >= 0");
  if (x > max_argument) throw DomainError("bessel: argument exceeds 1e6");
}

}  // namespace

double bessel_j0(double x) {
  check_argument(x);
  if (x < series_switch) return small_argument(x, false).j0;
  return hankel_asymptotic(0, x).real();
}

double bessel_j1(double x) {
  check_argument(x);
  if (x < series_switch) return small_argument(x, false).j1;
  return hankel_asymptotic(1, x).real();
}

double bessel_y0(double x) {
  check_argument(x);
  if (x <= 0.0) throw DomainError("bessel_y0: argument must be > 0");
  if (x < series_switch) return small_argument(x, true).y0;
  return hankel_asymptotic(0, x).imag();
}

double bessel_y1(double x) {
  check_argument(x);
  if (x <= 0.0) throw DomainError("bessel_y1: argument must be > 0");
  if (x < series_switch) return small_argument(x, true).y1;
  return hankel_asymptotic(1, x).imag();
}

double bessel_j(int order, double x) {
  check_argument(x);
  if (order < 0 || order > max_order)
    throw DomainError("bessel_j: order must lie in [0, 200], got " + std::to_string(order));
  if (order == 0) return bessel_j0(x);
  if (order == 1) return bessel_j1(x);
  if (x == 0.0) return 0.0;

  if (x > order) {
    // Forward recurrence is stable while n < x.
    double jm = bessel_j0(x), j = bessel_j1(x);
    for (int n = 1; n < order; ++n) {
      const double jp = 2.0 * n / x * j - jm;
      jm = j;
      j = jp;
    }
    return j;
  }

  // Miller: start well above max(order, x) and recur downwards, rescaling to
  // stay in range; normalize against whichever of J0/J1 is larger.
  const int start = 2 * ((order + static_cast<int>(x) + 40 + static_cast<int>(std::sqrt(60.0 * order))) / 2);
  double bp = 0.0, b = 1e-300, result = 0.0;
  double log_scale = 0.0;  // accumulated rescaling applied to b after result was captured
  bool captured = false;
  double b0 = 0.0, b1 = 0.0;
  for (int n = start; n > 0; --n) {
    const double bm = 2.0 * n / x * b - bp;
    bp = b;
    b = bm;
    if (!std::isfinite(b)) throw NumericalError("bessel_j: recurrence overflow");
    if (std::fabs(b) > 1e250) {
      b *= 1e-250;
      bp *= 1e-250;
      if (captured) log_scale += 250.0;
    }
    if (n - 1 == order) {
      result = b;
      captured = true;
    }
    if (n == 1) {
      b0 = b;
      b1 = bp;
    }
  }
  const double j0 = bessel_j0(x), j1 = bessel_j1(x);
  const double ratio = (std::fabs(j0) >= std::fabs(j1)) ? j0 / b0 : j1 / b1;
  // result was stored before later rescalings; undo them.
  const double value = result * ratio * std::pow(10.0, -log_scale);
  if (!std::isfinite(value)) throw NumericalError("bessel_j: recurrence overflow");
  return value;
}

double bessel_j_prime(int order, double x) {
  if (order == 0) return -bessel_j1(x);
  return 0.5 * (bessel_j(order - 1, x) - bessel_j(order + 1, x));
}

double bessel_y(int order, double x) {
  check_argument(x);
  if (x <= 0.0) throw DomainError("bessel_y: argument must be > 0");
  if (order < 0 || order > max_order)
    throw DomainError("bessel_y: order must lie in [0, 200], got " + std::to_string(order));
  // Forward recurrence is stable for Y at every order.
  double ym = bessel_y0(x);
  if (order == 0) return ym;
  double y = bessel_y1(x);
  for (int n = 1; n < order && std::isfinite(y); ++n) {
    const double yp = 2.0 * n / x * y - ym;
    ym = y;
    y = yp;
  }
  return y;
}

cplx hankel1(int order, double x) {
  if (order == 0 || order == 1) {
    const auto [h0, h1] = hankel1_01(x);
    return order == 0 ? h0 : h1;
  }
  return {bessel_j(order, x), bessel_y(order, x)};
}

std::pair<cplx, cplx> hankel1_01(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("hankel1: argument must be > 0");
  if (x > max_argument) throw DomainError("hankel1: argument exceeds 1e6");
  if (x < series_switch) {
    const SmallArg s = small_argument(x, true);
    return {cplx(s.j0, s.y0), cplx(s.j1, s.y1)};
  }
  const double amp = std::sqrt(2.0 / (pi * x));
  const cplx e = std::polar(amp, x - pi / 4.0);
  return {e * asymptotic_sum(0, x), e * (-I) * asymptotic_sum(1, x)};
}

}  // namespace hnabem::specfun
