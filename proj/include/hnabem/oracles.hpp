#pragma once

#include <map>
#include <vector>

#include "hnabem/geometry.hpp"
#include "hnabem/hna.hpp"

namespace hnabem {

enum class ReferenceKind { StandardBem, DiskSeries, FlatGrating };

const char* to_string(ReferenceKind kind);

struct DensitySample {
  int side = 0;
  double s = 0.0;
  cplx value;
};

/// Reference Neumann data sampled on a uniform mesh, with the resolution it
/// was computed at (dof per wavelength for BEM, series truncation otherwise).
struct ReferenceSolution {
  ReferenceKind kind = ReferenceKind::StandardBem;
  double dof_per_wavelength = 0.0;
  int resolution = 0;
  std::vector<DensitySample> samples;
};

/// Mesh for the standard BEM reference. With degree 0 and no corner layers
/// this is the plain uniform piecewise-constant mesh.
struct ReferenceOptions {
  int degree = 4;
  int corner_layers = 12;  // geometric refinement of the element at each side end
  double grading = 0.15;
};

/// N_std = ceil(dof_per_wavelength * |Gamma| / lambda), the dof count of the
/// uniform part of the reference mesh.
int standard_bem_size(const Boundary& boundary, double k, double dof_per_wavelength);

/// Reference mesh: with corner layers, each side end gets a zone of width
/// g = min(L_j, lambda)/4 refined geometrically toward the corner; the rest of
/// the side is split into ceil(dof_per_wavelength (L_j - 2g) / (lambda (degree+1)))
/// uniform elements.
std::vector<Element> standard_bem_mesh(const Boundary& boundary, double k, double dof_per_wavelength,
                                       const ReferenceOptions& options = {});

inline constexpr int standard_bem_max_size = 20000;

struct StandardBemSolution {
  ReferenceSolution reference;  // samples at element midpoints
  BoundaryDensity neumann;      // full Neumann trace, piecewise polynomial
  LinearSystemReport report;
};

/// Galerkin solution of S_k d_nu u = u^I on a screen.
StandardBemSolution standard_bem_reference(const Screen& screen, const Incidence& inc, double dof_per_wavelength,
                                           const ReferenceOptions& options = {}, const QuadBudget& budget = {});

/// Galerkin solution of (1/2 I + D'_k - i k S_k) d_nu u = d_nu u^I - i k u^I
/// on a convex polygon.
StandardBemSolution standard_bem_reference(const ConvexPolygon& poly, const Incidence& inc, double dof_per_wavelength,
                                           const ReferenceOptions& options = {}, const QuadBudget& budget = {});

/// Separable Helmholtz solutions on a disk of radius a centred at the origin:
/// u = sum_m c_m J_m(k r) exp(i m theta).
class DiskSeries {
 public:
  /// u = J_m(kr) exp(i m theta) / J_m(ka), the interior Dirichlet solution for
  /// boundary data exp(i m theta).
  static DiskSeries mode(double k, double radius, int m);
  /// Jacobi-Anger expansion of exp(i k x.d) with |m| <= truncation
  /// (default ceil(k a) + 20).
  static DiskSeries plane_wave(double k, double radius, const Vec2& direction, int truncation = -1);

  double wavenumber() const { return k_; }
  double radius() const { return radius_; }
  int truncation() const { return truncation_; }

  cplx value(const Vec2& x) const;
  Eigen::Vector2cd gradient(const Vec2& x) const;
  cplx normal_derivative(const Vec2& x, const Vec2& normal) const;

  /// Boundary samples of d_nu u on the circle (outward normal) at n equispaced angles.
  ReferenceSolution circle_neumann(int n) const;

 private:
  DiskSeries(double k, double radius, int truncation, std::map<int, cplx> coefficients);

  double k_, radius_;
  int truncation_;
  std::map<int, cplx> coeffs_;
};

/// k J'_m(ka) / J_m(ka); throws DomainError when |J_m(ka)| <= 1e-8.
double disk_dtn_eigenvalue(double k, double radius, int m);

/// d_nu u of the total field for a plane wave scattered by a sound-soft disk,
/// at polar angle theta on the circle (outward normal).
cplx disk_scattering_neumann(double k, double radius, const Vec2& direction, double theta, int truncation = -1);

/// Dirichlet-to-Neumann eigenvalue estimates from the boundary integral
/// composition S_k^{-1}(D_k + 1/2 I) applied to exp(i m theta) on a polygon,
/// discretized with piecewise constants; one value per requested m.
std::vector<cplx> polygon_dtn_eigenvalues(const ConvexPolygon& poly, double k, const std::vector<int>& modes,
                                          int elements_per_side, const QuadBudget& budget = {});

/// Exact solution for a flat sound-soft grating x2 = 0:
/// u = u^I - exp(i k (alpha_0 x1 + beta_0 x2)).
struct FlatGratingSolution {
  double k = 1.0, theta = 0.0, period = 1.0;
  double alpha0 = 0.0, beta0 = 1.0;
  ReferenceSolution reference;
  std::map<int, cplx> coefficients;  // c_0 = -1, the rest zero

  cplx neumann(double x1) const;
};

FlatGratingSolution flat_grating_exact(double k, double theta, double period, int samples = 64);

}  // namespace hnabem
