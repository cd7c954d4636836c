#pragma once

#include <functional>
#include <vector>

#include "hnabem/common.hpp"
#include "hnabem/geometry.hpp"
#include "hnabem/quadrature.hpp"

namespace hnabem {

// ---------------------------------------------------------------------------
// Kernels of the 2D Helmholtz fundamental solution Phi(x, y) = (i/4) H0(k|x - y|).

enum class KernelKind { Phi, DPhiDNuY, DPhiDNuX };

/// `normal` is nu(y) for DPhiDNuY and nu(x) for DPhiDNuX (ignored for Phi).
/// Throws DomainError when x == y.
cplx kernel_eval(KernelKind kind, double k, const Vec2& x, const Vec2& y, const Vec2& normal = Vec2::Zero());

// ---------------------------------------------------------------------------
// Boundary operators

enum class OperatorKind {
  SingleLayer,                // S_k
  DoubleLayer,                // D_k
  AdjointDoubleLayer,         // D'_k
  TangentialGradSingleLayer,  // x . grad_Gamma S_k
  StarCombined,               // x.nu (I/2 + D'_k) + x . grad_Gamma S_k - i eta S_k
  Combined,                   // I/2 + D'_k - i eta S_k
};

/// Coupling parameter eta: a constant with Re eta != 0, or the star-combined
/// rule eta(x) = k|x| + i/2.
struct Coupling {
  enum class Rule { Constant, Star };
  Rule rule = Rule::Constant;
  cplx value = 0.0;

  static Coupling constant(cplx eta);
  static Coupling star() { return {Rule::Star, 0.0}; }
  cplx at(const Vec2& x, double k) const;
};

/// Support element of a block of basis functions
///   b_l(s) = sqrt((2l + 1)/(b - a)) P_l(t(s)) exp(i k phase_rate s),  l = 0..degree,
/// where t maps [a, b] onto [-1, 1] and s is arclength on boundary side `side`.
struct Element {
  int side = 0;
  double a = 0.0;
  double b = 0.0;
  double phase_rate = 0.0;
  int degree = 0;

  double length() const { return b - a; }
  int size() const { return degree + 1; }
};

/// Values b_l(s), l = 0..e.degree, written to out.
void element_basis(const Element& e, double k, double s, cplx* out);
/// Derivatives d b_l/ds.
void element_basis_derivative(const Element& e, double k, double s, cplx* out);
/// Same, with the offset s - e.a supplied separately.
void element_basis_local(const Element& e, double k, double s, double from_a, cplx* out);
void element_basis_derivative_local(const Element& e, double k, double s, double from_a, cplx* out);

struct BasisFunction {
  Element element;
  int degree = 0;
};

/// Point at which an integral operator is evaluated: either a free point
/// (side < 0) or a boundary point anchor + offset along side `side`.
struct TargetPoint {
  Vec2 anchor = Vec2::Zero();
  Vec2 displacement = Vec2::Zero();
  int side = -1;
  double s_anchor = 0.0;
  double s_offset = 0.0;

  static TargetPoint free(const Vec2& x) { return {x, Vec2::Zero(), -1, 0.0, 0.0}; }
  static TargetPoint on_boundary(const Boundary& boundary, int side, double s_anchor, double s_offset = 0.0);
  Vec2 position() const { return anchor + displacement; }
  double s() const { return s_anchor + s_offset; }
};

/// Quadrature node for an integral over part of a side, seen from a target.
struct InnerNode {
  double s;       // arclength of y on its side
  double from_a;  // s - a, exact
  Vec2 diff;  // x - y, computed without cancellation
  double r;   // |x - y|
  double w;
};

/// Nodes for integrating over [a, b] on `side` a function that is smooth
/// except for a weak singularity at the target point: the interval is split
/// at the point closest to the target and graded toward it.
void inner_rule(const Boundary& boundary, int side, double a, double b, const TargetPoint& target,
                double rate, const QuadBudget& budget, std::vector<InnerNode>& out);

/// Distance from the target to [a, b] on `side`.
double distance_to(const Boundary& boundary, int side, double a, double b, const TargetPoint& target);

enum class TangentialMode { ByParts, Direct };

/// Galerkin pairings <A trial, test> = int_Gamma (A trial) conj(test) ds for
/// element blocks. Pure; safe for concurrent use.
class PairingEngine {
 public:
  PairingEngine(const Boundary& boundary, double k, OperatorKind kind, Coupling eta = Coupling::constant(1.0),
                QuadBudget budget = {});

  /// Matrix with rows indexed by test degrees and columns by trial degrees.
  Eigen::MatrixXcd block(const Element& trial, const Element& test) const;

  /// Direct evaluation of the tangential term (strongly singular kernel);
  /// valid only for well-separated elements. Used to check the by-parts form.
  void set_tangential_mode(TangentialMode mode) { tangential_mode_ = mode; }

  const Boundary& boundary() const { return *boundary_; }
  double wavenumber() const { return k_; }
  OperatorKind kind() const { return kind_; }
  const QuadBudget& budget() const { return budget_; }

  /// (A applied to the element basis)(x) for the weakly singular parts
  /// needed by the star-combined endpoint terms: single layer values.
  void single_layer_values(const Element& trial, const TargetPoint& x, cplx* out) const;

 private:
  struct InnerSums;
  void inner_sums(const Element& trial, const TargetPoint& x, bool need_s, bool need_dp, bool need_d,
                  bool need_t, InnerSums& sums) const;
  void outer_points(const Element& trial, const Element& test, QuadPoints& pts,
                    std::vector<TargetPoint>& targets) const;

  const Boundary* boundary_;
  double k_;
  OperatorKind kind_;
  Coupling eta_;
  QuadBudget budget_;
  TangentialMode tangential_mode_ = TangentialMode::ByParts;
};

/// Single pairing <A trial, test>.
cplx weak_pairing(OperatorKind kind, const Boundary& boundary, const BasisFunction& trial,
                  const BasisFunction& test, double k, Coupling eta = Coupling::constant(1.0),
                  const QuadBudget& budget = {});

/// Load vector int g(x) conj(b_l(x)) ds over the test element, for a smooth g
/// oscillating at most like exp(i k rate s).
Eigen::VectorXcd project_onto(const Boundary& boundary, const Element& test, double k,
                              const std::function<cplx(int side, double s, const Vec2& x)>& g, double rate,
                              const QuadBudget& budget);

/// Layer potential int_side K(x, y) density(y) ds(y) over [a, b] of one side,
/// for a density that oscillates at most like exp(i k rate s).
cplx layer_potential(const Boundary& boundary, int side, double a, double b, double k, KernelKind kind,
                     const std::function<cplx(double s)>& density, double rate, const TargetPoint& x,
                     const QuadBudget& budget);

/// Residual of Green's representation for u = Phi(., z), z exterior to the
/// closed polygon: S du/dnu - D u - (u(x) inside, 0 outside). Throws
/// DomainError when x lies within 1e-6 * diameter of the boundary.
cplx greens_identity_residual(const ConvexPolygon& poly, double k, const Vec2& z, const Vec2& x,
                              const QuadBudget& budget = {});

}  // namespace hnabem
