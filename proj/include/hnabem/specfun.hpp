#pragma once

#include <utility>

#include "hnabem/common.hpp"

// Cylinder functions of real, non-negative argument.
//
// J0, J1, Y0, Y1 use the ascending power series (in extended precision) for
// x < 12 and the Hankel asymptotic expansion for x >= 12. Integer orders
// n >= 2 of J come from forward recurrence when n < x and Miller's backward
// recurrence otherwise.
namespace hnabem::specfun {

inline constexpr double series_switch = 12.0;
inline constexpr int max_order = 200;
inline constexpr double max_argument = 1.0e6;

double bessel_j0(double x);
double bessel_j1(double x);
double bessel_y0(double x);
double bessel_y1(double x);

/// J_n(x) for 0 <= n <= 200, 0 <= x <= 1e6.
double bessel_j(int order, double x);

/// dJ_n/dx, n >= 0.
double bessel_j_prime(int order, double x);

/// Y_n(x) for 0 <= n <= 200, x > 0, by forward recurrence (overflows to
/// -inf for very large n/x).
double bessel_y(int order, double x);

/// H^(1)_n(x) = J_n(x) + i Y_n(x), 0 <= n <= 200, x > 0.
cplx hankel1(int order, double x);

/// H^(1)_0(x) and H^(1)_1(x) evaluated together (shares the expensive part).
std::pair<cplx, cplx> hankel1_01(double x);

}  // namespace hnabem::specfun
