#pragma once

#include <functional>
#include <vector>

#include "hnabem/common.hpp"

namespace hnabem {

/// Gauss-Legendre rule on [-1, 1].
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// q-point Gauss-Legendre rule, 1 <= q <= 64. Rules are cached.
const QuadRule& gauss_rule(int q);

/// Quadrature budget shared by all boundary integrals.
struct QuadBudget {
  double points_per_wavelength = 10.0;
  int singular_layers = 20;
  double singular_grading = 0.15;
  int gauss_order = 10;

  void validate() const;
};

/// Quadrature point given as an offset from an anchor abscissa. Keeping the
/// offset separate lets kernels evaluate |x - y| without cancellation.
struct QuadPoint {
  double anchor;
  double offset;
  double weight;
  double position() const { return anchor + offset; }
};

using QuadPoints = std::vector<QuadPoint>;

/// Composite Gauss on [a, b] with enough panels to give `budget.points_per_wavelength`
/// points per wavelength 2 pi / rate. rate <= 0 gives a single panel.
void append_oscillatory(double a, double b, double rate, const QuadBudget& budget, QuadPoints& out);

/// Composite Gauss on [anchor, anchor + length] (length may be negative)
/// graded geometrically toward the anchor: `layers` subintervals with ratio
/// `sigma`, each further subdivided for oscillation. With `split_layers` each
/// layer is also cut at its geometric midpoint, which algebraic endpoint
/// singularities such as t^{-1/2} need; logarithmic ones do not.
void append_graded(double anchor, double length, int layers, double rate, const QuadBudget& budget,
                   QuadPoints& out, bool split_layers = false);

/// Number of geometric layers needed to resolve a near-singularity at
/// distance `distance` from an interval of length `length`.
int layers_for_distance(double distance, double length, const QuadBudget& budget);

/// Integrate f over [a, b] with geometric grading toward the flagged endpoints
/// (composite Gauss of order q, `layers` layers with ratio sigma). Throws
/// NumericalError if f returns a non-finite value.
cplx integrate_graded(const std::function<cplx(double)>& f, double a, double b, bool singular_a,
                      bool singular_b, int layers, double sigma, int q);

}  // namespace hnabem
