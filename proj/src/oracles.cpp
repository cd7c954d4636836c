#include "hnabem/oracles.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "hnabem/specfun.hpp"

namespace hnabem {

const char* to_string(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::StandardBem: return "standard-bem";
    case ReferenceKind::DiskSeries: return "disk-series";
    case ReferenceKind::FlatGrating: return "flat-grating";
  }
  return "unknown";
}

namespace {

void check_reference_args(double k, double dof_per_wavelength) {
  if (!(k > 0.0)) throw ConfigError("standard BEM: wavenumber must be > 0");
  if (!(dof_per_wavelength >= 10.0)) throw ConfigError("standard BEM: at least 10 dof per wavelength are required");
}

}  // namespace

int standard_bem_size(const Boundary& boundary, double k, double dof_per_wavelength) {
  check_reference_args(k, dof_per_wavelength);
  const double n = dof_per_wavelength * boundary.total_length() * k / (2.0 * pi);
  return static_cast<int>(std::ceil(n - 1e-9));
}

std::vector<Element> standard_bem_mesh(const Boundary& boundary, double k, double dof_per_wavelength,
                                       const ReferenceOptions& options) {
  check_reference_args(k, dof_per_wavelength);
  if (options.degree < 0 || options.degree > 10) throw ConfigError("standard BEM: degree must lie in [0, 10]");
  if (options.corner_layers < 0 || options.corner_layers > 40)
    throw ConfigError("standard BEM: corner_layers must lie in [0, 40]");
  if (!(options.grading > 0.0 && options.grading < 1.0)) throw ConfigError("standard BEM: grading must lie in (0, 1)");
  const double lambda = 2.0 * pi / k;
  const int p = options.degree;
  std::vector<Element> out;
  for (int j = 0; j < boundary.size(); ++j) {
    const double L = boundary.sides[j].length;
    // graded zone of fixed width at each end; dof density only refines the middle
    const double g = options.corner_layers > 0 ? std::min(0.25 * L, 0.25 * lambda) : 0.0;
    if (options.corner_layers > 0 && g * std::pow(options.grading, options.corner_layers) < 1e-13 * L)
      throw ConfigError("standard BEM: corner refinement finer than floating-point resolution");
    const int n = std::max(1, static_cast<int>(std::ceil(dof_per_wavelength * (L - 2.0 * g) / (lambda * (p + 1)) - 1e-9)));
    std::vector<double> pts;
    for (int i = 0; i <= n; ++i) pts.push_back(i == n ? L - g : g + (L - 2.0 * g) * i / n);
    if (options.corner_layers > 0) {
      double x = g;
      for (int l = 0; l < options.corner_layers; ++l) {
        x *= options.grading;
        pts.push_back(x);
        pts.push_back(L - x);
      }
      pts.push_back(0.0);
      pts.push_back(L);
      std::sort(pts.begin(), pts.end());
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back({j, pts[i], pts[i + 1], 0.0, p});
  }
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Exact 2-norm condition numbers cost an SVD; past this size the LU-based
// 1-norm estimate is used instead.
constexpr int svd_limit = 2500;

Eigen::VectorXcd solve_reference(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& rhs, double& cond) {
  if (M.rows() <= svd_limit) return solve_dense(M, rhs, cond);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  const double rc = lu.rcond();
  cond = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(rc > 1e-15)) {
    std::ostringstream msg;
    msg << "singular reference system (condition estimate " << cond << ")";
    throw NumericalError(msg.str());
  }
  Eigen::VectorXcd c = lu.solve(rhs);
  if (!c.allFinite()) throw NumericalError("non-finite solution of the reference system");
  return c;
}

StandardBemSolution standard_bem(const Boundary& boundary, const Incidence& inc, double dpw, bool screen,
                                 const ReferenceOptions& options, const QuadBudget& budget) {
  const double k = inc.k;
  const std::vector<Element> elements = standard_bem_mesh(boundary, k, dpw, options);
  long total = 0;
  for (const auto& e : elements) total += e.size();
  if (total > standard_bem_max_size) {
    std::ostringstream msg;
    msg << "standard BEM reference needs N = " << total << " elements at k = " << k << " and " << dpw
        << " dof per wavelength, above the dense-solve limit of " << standard_bem_max_size;
    throw ConfigError(msg.str());
  }
  const auto t0 = std::chrono::steady_clock::now();
  const OperatorKind kind = screen ? OperatorKind::SingleLayer : OperatorKind::Combined;
  PairingEngine engine(boundary, k, kind, Coupling::constant(k), budget);
  Eigen::MatrixXcd M = assemble_galerkin_matrix(engine, elements);
  std::function<cplx(int, double, const Vec2&)> g;
  if (screen) {
    g = [&](int, double, const Vec2& x) { return inc.field(x); };
  } else {
    g = [&](int side, double, const Vec2& x) {
      return inc.normal_derivative(x, boundary.sides[side].normal) - I * k * inc.field(x);
    };
  }
  Eigen::VectorXcd rhs(total);
  for (std::size_t e = 0, off = 0; e < elements.size(); off += elements[e].size(), ++e)
    rhs.segment(off, elements[e].size()) = project_onto(boundary, elements[e], k, g, 1.0, budget);
  const double assembly_s = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  double cond = 1.0;
  Eigen::VectorXcd c = solve_reference(M, rhs, cond);
  const double solve_s = seconds_since(t1);

  BoundaryDensity phi(boundary, k, elements, c, DensityTag::ScaledPhi);
  // Plain piecewise polynomials: rewrap as a full Neumann trace without a
  // Physical Optics term.
  BoundaryDensity neumann = phi.with_physical_optics(Incidence(k, inc.direction, 0.0), 1.0);

  ReferenceSolution ref;
  ref.kind = ReferenceKind::StandardBem;
  ref.dof_per_wavelength = dpw;
  ref.resolution = static_cast<int>(total);
  for (const auto& e : elements) {
    const double s = 0.5 * (e.a + e.b);
    ref.samples.push_back({e.side, s, neumann(e.side, s)});
  }
  return {std::move(ref), std::move(neumann), {static_cast<int>(total), cond, assembly_s, solve_s}};
}

}  // namespace

StandardBemSolution standard_bem_reference(const Screen& screen, const Incidence& inc, double dof_per_wavelength,
                                           const ReferenceOptions& options, const QuadBudget& budget) {
  return standard_bem(screen.boundary(), inc, dof_per_wavelength, true, options, budget);
}

StandardBemSolution standard_bem_reference(const ConvexPolygon& poly, const Incidence& inc, double dof_per_wavelength,
                                           const ReferenceOptions& options, const QuadBudget& budget) {
  return standard_bem(poly.boundary(), inc, dof_per_wavelength, false, options, budget);
}

// ---------------------------------------------------------------------------

namespace {

cplx i_power(int m) {
  static const cplx table[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  return table[((m % 4) + 4) % 4];
}

double bessel_signed(int m, double x) {
  const double j = specfun::bessel_j(std::abs(m), x);
  return (m < 0 && (-m) % 2) ? -j : j;
}

double bessel_prime_signed(int m, double x) {
  const double j = specfun::bessel_j_prime(std::abs(m), x);
  return (m < 0 && (-m) % 2) ? -j : j;
}

void check_not_eigenvalue(double k, double radius, int m) {
  const double j = specfun::bessel_j(std::abs(m), k * radius);
  if (!(std::fabs(j) > 1e-8)) {
    std::ostringstream msg;
    msg << "k = " << k << " is (numerically) a Dirichlet eigenvalue of the disk: |J_" << std::abs(m)
        << "(ka)| = " << std::fabs(j);
    throw DomainError(msg.str());
  }
}

}  // namespace

DiskSeries::DiskSeries(double k, double radius, int truncation, std::map<int, cplx> coefficients)
    : k_(k), radius_(radius), truncation_(truncation), coeffs_(std::move(coefficients)) {}

DiskSeries DiskSeries::mode(double k, double radius, int m) {
  if (!(k > 0.0) || !(radius > 0.0)) throw ConfigError("disk series: k and radius must be > 0");
  if (std::abs(m) > specfun::max_order) throw ConfigError("disk series: mode order too large");
  check_not_eigenvalue(k, radius, m);
  return DiskSeries(k, radius, std::abs(m), {{m, 1.0 / bessel_signed(m, k * radius)}});
}

DiskSeries DiskSeries::plane_wave(double k, double radius, const Vec2& direction, int truncation) {
  if (!(k > 0.0) || !(radius > 0.0)) throw ConfigError("disk series: k and radius must be > 0");
  if (std::fabs(direction.norm() - 1.0) > 1e-12) throw ConfigError("disk series: direction must be a unit vector");
  const int M = truncation >= 0 ? truncation : static_cast<int>(std::ceil(k * radius)) + 20;
  if (M > specfun::max_order) throw ConfigError("disk series: truncation exceeds the supported Bessel order");
  const double phi = std::atan2(direction.y(), direction.x());
  std::map<int, cplx> c;
  for (int m = -M; m <= M; ++m) {
    c[m] = i_power(m) * std::exp(-I * (m * phi));
  }
  return DiskSeries(k, radius, M, std::move(c));
}

cplx DiskSeries::value(const Vec2& x) const {
  const double r = x.norm(), th = std::atan2(x.y(), x.x());
  cplx u = 0.0;
  for (const auto& [m, c] : coeffs_) u += c * bessel_signed(m, k_ * r) * std::exp(I * (m * th));
  return u;
}

Eigen::Vector2cd DiskSeries::gradient(const Vec2& x) const {
  const double r = x.norm();
  Eigen::Vector2cd g = Eigen::Vector2cd::Zero();
  if (r < 1e-12 * radius_) {
    // only |m| = 1 contributes at the origin: J_{+-1}(kr) e^{+-i theta} ~ +-(k/2)(x1 +- i x2)
    for (const auto& [m, c] : coeffs_) {
      if (m == 1) g += c * 0.5 * k_ * Eigen::Vector2cd(1.0, I);
      if (m == -1) g += c * (-0.5 * k_) * Eigen::Vector2cd(1.0, -I);
    }
    return g;
  }
  const double th = std::atan2(x.y(), x.x());
  const Vec2 rhat = x / r, that(-rhat.y(), rhat.x());
  cplx dr = 0.0, dth = 0.0;
  for (const auto& [m, c] : coeffs_) {
    const cplx e = c * std::exp(I * (m * th));
    dr += e * k_ * bessel_prime_signed(m, k_ * r);
    dth += e * (I * double(m)) * bessel_signed(m, k_ * r) / r;
  }
  return dr * rhat.cast<cplx>() + dth * that.cast<cplx>();
}

cplx DiskSeries::normal_derivative(const Vec2& x, const Vec2& normal) const {
  const Eigen::Vector2cd g = gradient(x);
  return g[0] * normal[0] + g[1] * normal[1];
}

ReferenceSolution DiskSeries::circle_neumann(int n) const {
  if (n < 1) throw ConfigError("disk series: at least one sample is required");
  ReferenceSolution ref;
  ref.kind = ReferenceKind::DiskSeries;
  ref.resolution = truncation_;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * pi * i / n;
    const Vec2 nu(std::cos(th), std::sin(th));
    ref.samples.push_back({0, radius_ * th, normal_derivative(radius_ * nu, nu)});
  }
  return ref;
}

double disk_dtn_eigenvalue(double k, double radius, int m) {
  check_not_eigenvalue(k, radius, m);
  return k * bessel_prime_signed(m, k * radius) / bessel_signed(m, k * radius);
}

cplx disk_scattering_neumann(double k, double radius, const Vec2& direction, double theta, int truncation) {
  if (!(k > 0.0) || !(radius > 0.0)) throw ConfigError("disk series: k and radius must be > 0");
  const int M = truncation >= 0 ? truncation : static_cast<int>(std::ceil(k * radius)) + 30;
  const double phi = std::atan2(direction.y(), direction.x());
  const double x = k * radius;
  // d_r u = sum_m i^m e^{i m (theta - phi)} (-2i / (pi a H_m(ka))), with H_{-m} = (-1)^m H_m
  cplx sum = 0.0;
  for (int m = 0; m <= M; ++m) {
    const cplx h = specfun::hankel1(m, x);
    if (!std::isfinite(std::abs(h))) break;
    const cplx term = i_power(m) * (-2.0 * I) / (pi * radius * h);
    if (m == 0) {
      sum += term;
    } else {
      // i^{-m} (-1)^m / H_m = i^m / H_m
      sum += term * (std::exp(I * (m * (theta - phi))) + std::exp(-I * (m * (theta - phi))));
    }
  }
  return sum;
}

std::vector<cplx> polygon_dtn_eigenvalues(const ConvexPolygon& poly, double k, const std::vector<int>& modes,
                                          int elements_per_side, const QuadBudget& budget) {
  if (elements_per_side < 1) throw ConfigError("polygon DtN: at least one element per side");
  const Boundary& boundary = poly.boundary();
  std::vector<Element> elements;
  for (int j = 0; j < boundary.size(); ++j) {
    const double L = boundary.sides[j].length;
    for (int i = 0; i < elements_per_side; ++i)
      elements.push_back({j, L * i / elements_per_side, i + 1 == elements_per_side ? L : L * (i + 1) / elements_per_side,
                          0.0, 0});
  }
  PairingEngine single(boundary, k, OperatorKind::SingleLayer, Coupling::constant(1.0), budget);
  PairingEngine dbl(boundary, k, OperatorKind::DoubleLayer, Coupling::constant(1.0), budget);
  const Eigen::MatrixXcd S = assemble_galerkin_matrix(single, elements);
  const Eigen::MatrixXcd D = assemble_galerkin_matrix(dbl, elements);
  double cond = 1.0;
  solve_dense(S, Eigen::VectorXcd::Zero(S.rows()), cond);  // singularity check
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(S);
  const int N = static_cast<int>(elements.size());
  std::vector<cplx> out;
  for (int m : modes) {
    auto data = [&](int, double, const Vec2& x) { return std::exp(I * (m * std::atan2(x.y(), x.x()))); };
    Eigen::VectorXcd h(N);
    for (int e = 0; e < N; ++e) h[e] = project_onto(boundary, elements[e], k, data, 0.0, budget)[0];
    // the piecewise-constant basis is L2-orthonormal, so the mass matrix is I
    const Eigen::VectorXcd phi = lu.solve(D * h + 0.5 * h);
    out.push_back(h.dot(phi) / h.squaredNorm());
  }
  return out;
}

// ---------------------------------------------------------------------------

cplx FlatGratingSolution::neumann(double x1) const {
  return -2.0 * I * k * beta0 * std::exp(I * (k * alpha0 * x1));
}

FlatGratingSolution flat_grating_exact(double k, double theta, double period, int samples) {
  if (!(k > 0.0) || !(period > 0.0)) throw ConfigError("flat grating: k and period must be > 0");
  if (!(std::fabs(theta) < pi / 2)) throw ConfigError("flat grating: |theta| must be < pi/2");
  if (samples < 1) throw ConfigError("flat grating: at least one sample is required");
  FlatGratingSolution out;
  out.k = k;
  out.theta = theta;
  out.period = period;
  out.alpha0 = std::sin(theta);
  out.beta0 = std::cos(theta);
  out.reference.kind = ReferenceKind::FlatGrating;
  out.reference.resolution = samples;
  for (int i = 0; i < samples; ++i) {
    const double x1 = period * (i + 0.5) / samples;
    out.reference.samples.push_back({0, x1, out.neumann(x1)});
  }
  out.coefficients[0] = -1.0;
  return out;
}

}  // namespace hnabem
