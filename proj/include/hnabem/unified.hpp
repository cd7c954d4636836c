#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hnabem/geometry.hpp"
#include "hnabem/hna.hpp"

namespace hnabem {

/// v(x, theta) = exp(i k (cos theta x1 + sin theta x2)) for complex theta.
class GeneralizedPlaneWave {
 public:
  GeneralizedPlaneWave(double k, cplx theta);
  /// Build from (cos theta, sin theta) directly, avoiding the round trip
  /// through the angle.
  static GeneralizedPlaneWave from_direction(double k, cplx cos_theta, cplx sin_theta);

  double wavenumber() const { return k_; }
  cplx theta() const;
  cplx cos_theta() const { return c_; }
  cplx sin_theta() const { return s_; }

  cplx value(const Vec2& x) const;
  cplx normal_derivative(const Vec2& x, const Vec2& normal) const;

 private:
  GeneralizedPlaneWave(double k, cplx c, cplx s, int);
  double k_;
  cplx c_, s_;
};

struct PlaneWaveSample {
  cplx value;
  cplx normal_derivative;
};

cplx gpw_eval(cplx theta, double k, const Vec2& x);
PlaneWaveSample gpw_eval(cplx theta, double k, const Vec2& x, const Vec2& normal);

/// Coefficient matrix and right-hand side of a unified-transform system.
struct GramSystem {
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd rhs;
  bool hermitian = false;
  double cond = 1.0;
  double min_eigenvalue = 0.0;    // Hermitian systems only
  double hermitian_defect = 0.0;  // max |a_mn - conj(a_nm)| / max |a_mn|
};

/// Hermitian systems are assembled and factorized in extended precision; the
/// refusal threshold is a condition number of 1e14 scaled from double to that
/// working precision.
double gram_condition_limit();

/// Data on a polygon boundary: f(side, s, x).
using BoundaryData = std::function<cplx(int, double, const Vec2&)>;

/// phi_N = sum_n c_n v(., theta_n) restricted to the boundary.
struct PlaneWaveDensity {
  Boundary boundary;
  std::vector<GeneralizedPlaneWave> waves;
  Eigen::VectorXcd coefficients;

  cplx operator()(int side, double s) const;
  /// ||phi_N - exact||_{L2(boundary)}.
  double l2_distance(const BoundaryData& exact) const;
};

struct InteriorSolution {
  PlaneWaveDensity density;
  GramSystem gram;
  LinearSystemReport report;
};

/// theta_n = 2 pi (n - 1) / N, n = 1..N.
std::vector<cplx> equispaced_directions(int n);

/// Galerkin solution of the global relation for the interior Dirichlet
/// problem with trial space = span of the plane-wave traces:
/// sum_n a_mn c_n = int h conj(d_nu v_m) ds, a_mn = int v_n conj(v_m) ds.
/// The caller asserts that -k^2 is not a Dirichlet eigenvalue.
InteriorSolution interior_planewave_galerkin(const ConvexPolygon& poly, double k, const BoundaryData& h,
                                             const std::vector<cplx>& thetas);

/// ||f||_{L2(boundary)} by Gauss panels resolving oscillation up to `rate`.
double boundary_l2_norm(const Boundary& boundary, const BoundaryData& f, double rate);

// ---------------------------------------------------------------------------
// Gratings

struct RayleighMode {
  int n = 0;
  double alpha = 0.0;
  cplx beta;  // real nonnegative or positive imaginary

  bool propagating() const { return std::abs(alpha) <= 1.0; }
  /// v(., theta_n) with (cos theta_n, sin theta_n) = (-alpha_n, beta_n).
  GeneralizedPlaneWave test_wave(double k) const;
};

struct RayleighSpectrum {
  double k = 1.0, period = 1.0, theta_inc = 0.0, mu = 0.0;
  std::vector<RayleighMode> modes;

  const RayleighMode& mode(int n) const;
  std::vector<int> propagating() const;
};

RayleighMode rayleigh_mode(double k, double period, double theta_inc, int n);
RayleighSpectrum rayleigh_modes(double k, double period, double theta_inc, int n_min, int n_max);

/// {-half_width, ..., half_width}.
std::vector<int> symmetric_modes(int half_width);
/// All propagating indices, then `evanescent` further indices in order of
/// increasing |alpha_n| (ties broken toward negative n).
std::vector<int> propagating_plus_evanescent(double k, double period, double theta_inc, int evanescent);

enum class GratingMethod { SC, SS, SSstar };
const char* to_string(GratingMethod method);
GratingMethod parse_grating_method(const std::string& name);

/// Constant on the right-hand side of the grating global relation:
/// -2 i k beta_0 L (exact for the flat grating at any incidence) or the
/// published -2 i k L, which agrees only at normal incidence.
enum class GratingRhs { Calibrated, Published };

struct GratingOptions {
  GratingRhs rhs = GratingRhs::Calibrated;
  int gauss_order = 20;
};

/// Approximate total-field Neumann density sum_m c_m chi_m on one period.
struct GratingDensity {
  GratingProfile profile;
  double k = 1.0, theta_inc = 0.0;
  GratingMethod method = GratingMethod::SSstar;
  std::vector<RayleighMode> modes;
  Eigen::VectorXcd coefficients;

  /// Evaluated at (x1, f(x1)); outside [0, L] through quasi-periodicity.
  cplx operator()(double x1) const;
};

struct GratingSolution {
  GratingDensity density;
  GramSystem system;
  LinearSystemReport report;
  int n_propagating = 0;
};

/// Solve sum_m (int chi_m v_{n_j} ds) c_m = R delta_{0,n_j} for the SC (pulse),
/// SS (chi_m = v(., theta_{n_m} + pi)) or SS* (chi_m = conj v(., theta_{n_m}))
/// basis. The mode set must contain n = 0.
GratingSolution grating_assemble_solve(GratingMethod method, const GratingProfile& profile, double k,
                                       double theta_inc, const std::vector<int>& modes,
                                       const GratingOptions& options = {});

/// ||f||_{L2(Gamma^L)} for a function of x1.
double grating_l2_norm(const GratingProfile& profile, const std::function<cplx(double)>& f, double rate,
                       int gauss_order = 20);

struct RayleighCoefficients {
  RayleighSpectrum spectrum;
  std::map<int, cplx> c;

  /// (beta_n / beta_0) |c_n|^2 for propagating n, 0 otherwise.
  double efficiency(int n) const;
};

/// c_n = int phi exp(-i k (alpha_n x1 + beta_n x2)) ds / (2 i k beta_n L), the
/// scattered-field Rayleigh coefficients from Green's identity in one period
/// of the strip above the profile. The incident wave drops out, so a zero
/// density gives c = 0.
RayleighCoefficients rayleigh_coefficients(const std::function<cplx(double)>& density,
                                           const GratingProfile& profile, const RayleighSpectrum& spectrum,
                                           int gauss_order = 20);
RayleighCoefficients rayleigh_coefficients(const GratingDensity& density, int n_min, int n_max);

/// sum over propagating n of (beta_n / beta_0) |c_n|^2.
double energy_balance(const RayleighCoefficients& coeffs);

}  // namespace hnabem
