#pragma once

#include <vector>

#include "hnabem/common.hpp"
#include "hnabem/geometry.hpp"
#include "hnabem/operators.hpp"
#include "hnabem/quadrature.hpp"

namespace hnabem {

/// Geometric mesh on [0, L] with n layers: x_0 = 0, x_i = sigma^{n-i} L.
struct GradedMesh {
  double length = 0.0;
  int layers = 0;
  double sigma = 0.15;
  std::vector<double> points;
};

GradedMesh geometric_mesh(double L, int n, double sigma);

/// Physical Optics term at arclength s on `side`: 2 du^I/dnu on illuminated
/// sides (every side of an open boundary), 0 in shadow.
cplx physical_optics(const Boundary& boundary, const Incidence& inc, int side, double s);

enum class Direction { Plus, Minus };

struct HnaBasisFn {
  int side = 0;
  Direction direction = Direction::Plus;
  int element = 0;  // index within its family, counted from the graded end
  int degree = 0;
};

struct HnaSpaceSpec {
  int p = 0;
  int n = 1;
  double sigma = 0.15;
  int dimension = 0;
  std::vector<double> delta_plus, delta_minus;  // polygon corner exponents per side
};

/// Overlapping-mesh HNA space: on each side, polynomials of degree p on the
/// mesh graded toward s = 0 times exp(iks), plus the mirrored mesh graded
/// toward s = L_j times exp(-iks).
class HnaSpace {
 public:
  HnaSpace(Boundary boundary, double k, HnaSpaceSpec spec, std::vector<Element> elements,
           std::vector<HnaBasisFn> basis);

  const Boundary& boundary() const { return boundary_; }
  double wavenumber() const { return k_; }
  const HnaSpaceSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<HnaBasisFn>& basis() const { return basis_; }
  /// Index of the first basis function of element e (blocks are contiguous).
  int offset(int e) const { return offsets_[e]; }

 private:
  Boundary boundary_;
  double k_;
  HnaSpaceSpec spec_;
  std::vector<Element> elements_;
  std::vector<HnaBasisFn> basis_;
  std::vector<int> offsets_;
};

HnaSpace build_hna_space(const Screen& screen, double k, int p, int n, double sigma = 0.15);
HnaSpace build_hna_space(const ConvexPolygon& poly, double k, int p, int n, double sigma = 0.15);

enum class DensityTag { ScaledPhi, FullNeumann };

/// Boundary density scale * sum_j c_j b_j(s) (+ Physical Optics term when
/// attached) over piecewise polynomial-times-phase elements.
class BoundaryDensity {
 public:
  BoundaryDensity(Boundary boundary, double k, std::vector<Element> elements, Eigen::VectorXcd coefficients,
                  DensityTag tag);

  cplx operator()(int side, double s) const;

  DensityTag tag() const { return tag_; }
  const Boundary& boundary() const { return boundary_; }
  double wavenumber() const { return k_; }
  const std::vector<Element>& elements() const { return elements_; }
  const Eigen::VectorXcd& coefficients() const { return coeffs_; }
  double scale() const { return scale_; }
  bool has_physical_optics() const { return has_po_; }

  /// Sorted element endpoints on one side (including 0 and L_j).
  std::vector<double> breakpoints(int side) const;
  /// Bound on the oscillation rate of the density, in units of k.
  double phase_rate() const;

  /// Full Neumann density scale * phi + Psi.
  BoundaryDensity with_physical_optics(const Incidence& inc, double scale) const;

 private:
  Boundary boundary_;
  double k_;
  std::vector<Element> elements_;
  Eigen::VectorXcd coeffs_;
  std::vector<int> offsets_;
  std::vector<std::vector<int>> by_side_;
  std::vector<double> max_length_;
  DensityTag tag_;
  double scale_ = 1.0;
  bool has_po_ = false;
  Incidence inc_;
};

enum class Formulation { ScreenSingleLayer, PolygonStarCombined };

struct LinearSystemReport {
  int N = 0;
  double cond = 1.0;
  double assembly_s = 0.0;
  double solve_s = 0.0;
};

struct HnaSolution {
  BoundaryDensity phi;
  LinearSystemReport report;
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd rhs;
};

/// Dense Galerkin matrix M(i, j) = <A b_j, b_i> over a list of elements
/// whose basis functions are numbered element by element.
Eigen::MatrixXcd assemble_galerkin_matrix(const PairingEngine& engine, const std::vector<Element>& elements);

/// Solve M c = rhs by LU with partial pivoting and report the 2-norm
/// condition number (from singular values). Throws NumericalError when the
/// matrix is numerically singular.
Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& rhs, double& cond);

HnaSolution assemble_and_solve(const HnaSpace& space, Formulation formulation, const Incidence& inc,
                               const QuadBudget& budget = {});

/// d_nu u = k phi + Psi from a scaled-phi density.
BoundaryDensity reconstruct_neumann(const BoundaryDensity& phi, const Incidence& inc);

/// Total field u(x) = u^I(x) - int Phi(x, y) d_nu u(y) ds(y).
cplx domain_field(const BoundaryDensity& neumann, const Incidence& inc, const Vec2& x, const QuadBudget& budget = {});

/// Far-field pattern F(xhat) = -int exp(-ik xhat.y) d_nu u(y) ds(y).
std::vector<cplx> far_field(const BoundaryDensity& neumann, const std::vector<Vec2>& directions,
                            const QuadBudget& budget = {});

enum class Norm { L1, L2 };

/// ||a - b|| / ||b|| over the boundary; both densities must live on the
/// same boundary.
double relative_error(const BoundaryDensity& a, const BoundaryDensity& b, Norm norm, const QuadBudget& budget = {});

}  // namespace hnabem
