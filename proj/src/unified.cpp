#include "hnabem/unified.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "hnabem/quadrature.hpp"

namespace hnabem {

namespace {

using cplxl = std::complex<long double>;
using MatrixXcl = Eigen::Matrix<cplxl, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXcl = Eigen::Matrix<cplxl, Eigen::Dynamic, 1>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

cplxl wave_value_l(double k, cplx c, cplx s, const Vec2& x) {
  const cplxl phase = cplxl(0.0L, static_cast<long double>(k)) *
                      (cplxl(c) * static_cast<long double>(x.x()) + cplxl(s) * static_cast<long double>(x.y()));
  return std::exp(phase);
}

struct HermitianResult {
  Eigen::VectorXcd x;
  double cond = 1.0;
  double min_eigenvalue = 0.0;
  double defect = 0.0;
};

HermitianResult solve_hermitian(const MatrixXcl& A, const VectorXcl& b, const std::string& context) {
  HermitianResult out;
  long double amax = 0.0L, dmax = 0.0L;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      amax = std::max(amax, std::abs(A(i, j)));
      dmax = std::max(dmax, std::abs(A(i, j) - std::conj(A(j, i))));
    }
  out.defect = amax > 0.0L ? static_cast<double>(dmax / amax) : 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXcl> eig(A, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError(context + ": eigenvalue computation failed");
  const long double lmin = eig.eigenvalues()(0), lmax = eig.eigenvalues()(A.rows() - 1);
  out.min_eigenvalue = static_cast<double>(lmin);
  out.cond = lmin > 0.0L ? static_cast<double>(lmax / lmin) : std::numeric_limits<double>::infinity();
  if (!(lmin > 0.0L) || out.cond > gram_condition_limit()) {
    std::ostringstream msg;
    msg << context << ": Gram matrix too ill-conditioned (condition estimate " << out.cond
        << ", smallest eigenvalue " << out.min_eigenvalue << ")";
    throw NumericalError(msg.str());
  }
  Eigen::LLT<MatrixXcl> llt(A);
  if (llt.info() != Eigen::Success) throw NumericalError(context + ": Cholesky factorization failed");
  const VectorXcl x = llt.solve(b);
  out.x = x.unaryExpr([](const cplxl& z) { return cplx(static_cast<double>(z.real()), static_cast<double>(z.imag())); });
  if (!out.x.allFinite()) throw NumericalError(context + ": non-finite solution");
  return out;
}

Eigen::MatrixXcd to_double(const MatrixXcl& A) {
  return A.unaryExpr([](const cplxl& z) { return cplx(static_cast<double>(z.real()), static_cast<double>(z.imag())); });
}

Eigen::VectorXcd to_double(const VectorXcl& v) {
  return v.unaryExpr([](const cplxl& z) { return cplx(static_cast<double>(z.real()), static_cast<double>(z.imag())); });
}

struct BoundaryNode {
  int side;
  double s;
  Vec2 x;
  double w;
};

// Gauss panels of length at most pi / rate on every side.
std::vector<BoundaryNode> boundary_nodes(const Boundary& boundary, double rate, int q) {
  const QuadRule& g = gauss_rule(q);
  std::vector<BoundaryNode> out;
  for (int j = 0; j < boundary.size(); ++j) {
    const Segment& side = boundary.sides[j];
    const int panels = std::max(1, static_cast<int>(std::ceil(rate * side.length / pi)));
    const double h = side.length / panels;
    for (int p = 0; p < panels; ++p)
      for (int i = 0; i < g.size(); ++i) {
        const double s = (p + 0.5 * (g.nodes[i] + 1.0)) * h;
        out.push_back({j, s, side.point(s), 0.5 * h * g.weights[i]});
      }
  }
  return out;
}

double wave_rate(double k, const std::vector<GeneralizedPlaneWave>& waves) {
  double m = 0.0;
  for (const auto& w : waves) m = std::max(m, std::abs(w.cos_theta()) + std::abs(w.sin_theta()));
  return 2.0 * k * m + 1.0;
}

}  // namespace

double gram_condition_limit() {
  return 1e14 * (std::numeric_limits<double>::epsilon() / std::numeric_limits<long double>::epsilon());
}

// ---------------------------------------------------------------------------

GeneralizedPlaneWave::GeneralizedPlaneWave(double k, cplx c, cplx s, int) : k_(k), c_(c), s_(s) {}

GeneralizedPlaneWave::GeneralizedPlaneWave(double k, cplx theta)
    : GeneralizedPlaneWave(k, std::cos(theta), std::sin(theta), 0) {
  if (!(k > 0.0)) throw ConfigError("plane wave: wavenumber must be > 0");
}

GeneralizedPlaneWave GeneralizedPlaneWave::from_direction(double k, cplx cos_theta, cplx sin_theta) {
  if (!(k > 0.0)) throw ConfigError("plane wave: wavenumber must be > 0");
  const double scale = std::max(1.0, std::norm(cos_theta) + std::norm(sin_theta));
  if (std::abs(cos_theta * cos_theta + sin_theta * sin_theta - 1.0) > 1e-12 * scale)
    throw ConfigError("plane wave: direction must satisfy cos^2 + sin^2 = 1");
  return GeneralizedPlaneWave(k, cos_theta, sin_theta, 0);
}

cplx GeneralizedPlaneWave::theta() const { return -I * std::log(c_ + I * s_); }

cplx GeneralizedPlaneWave::value(const Vec2& x) const { return std::exp(I * k_ * (c_ * x.x() + s_ * x.y())); }

cplx GeneralizedPlaneWave::normal_derivative(const Vec2& x, const Vec2& normal) const {
  return I * k_ * (c_ * normal.x() + s_ * normal.y()) * value(x);
}

cplx gpw_eval(cplx theta, double k, const Vec2& x) { return GeneralizedPlaneWave(k, theta).value(x); }

PlaneWaveSample gpw_eval(cplx theta, double k, const Vec2& x, const Vec2& normal) {
  const GeneralizedPlaneWave v(k, theta);
  return {v.value(x), v.normal_derivative(x, normal)};
}

// ---------------------------------------------------------------------------

cplx PlaneWaveDensity::operator()(int side, double s) const {
  const Vec2 x = boundary.sides.at(side).point(s);
  cplx sum = 0.0;
  for (std::size_t n = 0; n < waves.size(); ++n) sum += coefficients[n] * waves[n].value(x);
  return sum;
}

double PlaneWaveDensity::l2_distance(const BoundaryData& exact) const {
  const double k = waves.empty() ? 1.0 : waves.front().wavenumber();
  return boundary_l2_norm(
      boundary, [&](int side, double s, const Vec2& x) { return (*this)(side, s) - exact(side, s, x); },
      wave_rate(k, waves) + 2.0 * k);
}

double boundary_l2_norm(const Boundary& boundary, const BoundaryData& f, double rate) {
  double sum = 0.0;
  for (const auto& nd : boundary_nodes(boundary, rate, 20)) sum += nd.w * std::norm(f(nd.side, nd.s, nd.x));
  return std::sqrt(sum);
}

std::vector<cplx> equispaced_directions(int n) {
  if (n < 1) throw ConfigError("at least one direction is required");
  std::vector<cplx> out;
  for (int i = 0; i < n; ++i) out.emplace_back(2.0 * pi * i / n, 0.0);
  return out;
}

InteriorSolution interior_planewave_galerkin(const ConvexPolygon& poly, double k, const BoundaryData& h,
                                             const std::vector<cplx>& thetas) {
  if (!(k > 0.0)) throw ConfigError("interior solver: wavenumber must be > 0");
  if (thetas.empty()) throw ConfigError("interior solver: at least one direction is required");
  std::vector<GeneralizedPlaneWave> waves;
  for (cplx t : thetas) waves.emplace_back(k, t);
  const int N = static_cast<int>(waves.size());
  for (int m = 0; m < N; ++m)
    for (int n = m + 1; n < N; ++n)
      if (std::abs(waves[m].cos_theta() - waves[n].cos_theta()) + std::abs(waves[m].sin_theta() - waves[n].sin_theta()) <
          1e-12) {
        std::ostringstream msg;
        msg << "interior solver: directions " << m << " and " << n << " coincide";
        throw ConfigError(msg.str());
      }

  const auto t0 = std::chrono::steady_clock::now();
  const Boundary& boundary = poly.boundary();
  const auto nodes = boundary_nodes(boundary, wave_rate(k, waves), 20);
  const int Q = static_cast<int>(nodes.size());
  MatrixXcl B(Q, N), WD(Q, N);
  VectorXcl hv(Q);
  for (int q = 0; q < Q; ++q) {
    const auto& nd = nodes[q];
    const Vec2& nu = boundary.sides[nd.side].normal;
    const long double w = nd.w;
    hv[q] = cplxl(h(nd.side, nd.s, nd.x)) * w;
    for (int n = 0; n < N; ++n) {
      const cplxl v = wave_value_l(k, waves[n].cos_theta(), waves[n].sin_theta(), nd.x);
      B(q, n) = v;
      const cplxl dn = cplxl(0.0L, static_cast<long double>(k)) *
                       (cplxl(waves[n].cos_theta()) * static_cast<long double>(nu.x()) +
                        cplxl(waves[n].sin_theta()) * static_cast<long double>(nu.y()));
      WD(q, n) = dn * v;
    }
  }
  MatrixXcl A(N, N);
  VectorXcl rhs(N);
  for (int m = 0; m < N; ++m) {
    cplxl r = 0.0L;
    for (int q = 0; q < Q; ++q) r += hv[q] * std::conj(WD(q, m));
    rhs[m] = r;
    for (int n = 0; n < N; ++n) {
      cplxl a = 0.0L;
      for (int q = 0; q < Q; ++q) a += static_cast<long double>(nodes[q].w) * B(q, n) * std::conj(B(q, m));
      A(m, n) = a;
    }
  }
  const double assembly_s = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const HermitianResult sol = solve_hermitian(A, rhs, "interior solver");
  const double solve_s = seconds_since(t1);

  InteriorSolution out{{boundary, waves, sol.x},
                       {to_double(A), to_double(rhs), true, sol.cond, sol.min_eigenvalue, sol.defect},
                       {N, sol.cond, assembly_s, solve_s}};
  return out;
}

// ---------------------------------------------------------------------------

GeneralizedPlaneWave RayleighMode::test_wave(double k) const {
  return GeneralizedPlaneWave::from_direction(k, -alpha, beta);
}

const RayleighMode& RayleighSpectrum::mode(int n) const {
  for (const auto& m : modes)
    if (m.n == n) return m;
  throw ConfigError("Rayleigh mode " + std::to_string(n) + " is not in the spectrum");
}

std::vector<int> RayleighSpectrum::propagating() const {
  std::vector<int> out;
  for (const auto& m : modes)
    if (m.propagating()) out.push_back(m.n);
  return out;
}

namespace {

void check_grating_args(double k, double period, double theta_inc) {
  if (!(k > 0.0)) throw ConfigError("grating: wavenumber must be > 0");
  if (!(period > 0.0)) throw ConfigError("grating: period must be > 0");
  if (!(std::fabs(theta_inc) < pi / 2)) throw ConfigError("grating: |theta_inc| must be < pi/2");
}

}  // namespace

RayleighMode rayleigh_mode(double k, double period, double theta_inc, int n) {
  check_grating_args(k, period, theta_inc);
  RayleighMode m;
  m.n = n;
  m.alpha = std::sin(theta_inc) + 2.0 * pi * n / (k * period);
  const double a = std::abs(m.alpha);
  m.beta = a <= 1.0 ? cplx(std::sqrt((1.0 - a) * (1.0 + a)), 0.0) : cplx(0.0, std::sqrt((a - 1.0) * (a + 1.0)));
  return m;
}

RayleighSpectrum rayleigh_modes(double k, double period, double theta_inc, int n_min, int n_max) {
  check_grating_args(k, period, theta_inc);
  if (n_min > n_max) throw ConfigError("Rayleigh modes: empty index window");
  if (static_cast<long>(n_max) - n_min > 100000) throw ConfigError("Rayleigh modes: index window too large");
  RayleighSpectrum out;
  out.k = k;
  out.period = period;
  out.theta_inc = theta_inc;
  out.mu = k * std::sin(theta_inc);
  for (int n = n_min; n <= n_max; ++n) out.modes.push_back(rayleigh_mode(k, period, theta_inc, n));
  return out;
}

std::vector<int> symmetric_modes(int half_width) {
  if (half_width < 0) throw ConfigError("mode window half-width must be >= 0");
  std::vector<int> out;
  for (int n = -half_width; n <= half_width; ++n) out.push_back(n);
  return out;
}

std::vector<int> propagating_plus_evanescent(double k, double period, double theta_inc, int evanescent) {
  check_grating_args(k, period, theta_inc);
  if (evanescent < 0) throw ConfigError("number of evanescent modes must be >= 0");
  const double step = 2.0 * pi / (k * period);
  const int reach = static_cast<int>(std::ceil(2.0 / step)) + evanescent + 2;
  std::vector<RayleighMode> cand;
  for (int n = -reach; n <= reach; ++n) cand.push_back(rayleigh_mode(k, period, theta_inc, n));
  std::vector<int> out;
  for (const auto& m : cand)
    if (m.propagating()) out.push_back(m.n);
  std::vector<RayleighMode> ev;
  for (const auto& m : cand)
    if (!m.propagating()) ev.push_back(m);
  std::stable_sort(ev.begin(), ev.end(), [](const RayleighMode& a, const RayleighMode& b) {
    return std::abs(a.alpha) < std::abs(b.alpha);
  });
  for (int i = 0; i < evanescent; ++i) out.push_back(ev[i].n);
  return out;
}

const char* to_string(GratingMethod method) {
  switch (method) {
    case GratingMethod::SC: return "SC";
    case GratingMethod::SS: return "SS";
    case GratingMethod::SSstar: return "SSstar";
  }
  return "unknown";
}

GratingMethod parse_grating_method(const std::string& name) {
  if (name == "SC" || name == "sc") return GratingMethod::SC;
  if (name == "SS" || name == "ss") return GratingMethod::SS;
  if (name == "SSstar" || name == "ssstar" || name == "SS*") return GratingMethod::SSstar;
  throw ConfigError("unknown grating method '" + name + "' (expected SC, SS or SSstar)");
}

namespace {

struct GratingNode {
  double x1;
  Vec2 x;
  double w;  // includes the surface element
};

// Gauss panels on [0, L] respecting the given breakpoints, each panel no
// longer than pi / rate.
std::vector<GratingNode> grating_nodes(const GratingProfile& profile, std::vector<double> breaks, double rate, int q) {
  const double L = profile.period();
  breaks.push_back(0.0);
  breaks.push_back(L);
  for (double x : profile.knots()) breaks.push_back(x);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const QuadRule& g = gauss_rule(q);
  std::vector<GratingNode> out;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double a0 = breaks[b], a1 = breaks[b + 1];
    if (!(a1 > a0) || a0 < 0.0 || a1 > L) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil(rate * (a1 - a0) / pi)));
    const double h = (a1 - a0) / panels;
    for (int p = 0; p < panels; ++p)
      for (int i = 0; i < g.size(); ++i) {
        const double x1 = a0 + (p + 0.5 * (g.nodes[i] + 1.0)) * h;
        out.push_back({x1, Vec2(x1, profile.f(x1)), 0.5 * h * g.weights[i] * profile.jacobian(x1)});
      }
  }
  return out;
}

double grating_rate(double k, const GratingProfile& profile, const std::vector<RayleighMode>& modes) {
  double amax = 0.0, bmax = 0.0;
  for (const auto& m : modes) {
    amax = std::max(amax, std::abs(m.alpha));
    bmax = std::max(bmax, std::abs(m.beta));
  }
  return k * (2.0 * amax + 2.0 * bmax * std::max(1.0, profile.max_slope())) + 2.0 * pi / profile.period();
}

// Value of the trial function chi_m at a point of the profile.
cplx trial_value(GratingMethod method, double k, const RayleighMode& m, int index, int count, double period,
                 const Vec2& x) {
  switch (method) {
    case GratingMethod::SC: {
      const double h = period / count;
      const int cell = std::min(count - 1, static_cast<int>(std::floor(x.x() / h)));
      return cell == index ? 1.0 : 0.0;
    }
    case GratingMethod::SS: return std::exp(I * k * (m.alpha * x.x() - m.beta * x.y()));
    case GratingMethod::SSstar: return std::exp(I * k * (m.alpha * x.x() - std::conj(m.beta) * x.y()));
  }
  return 0.0;
}

std::vector<double> pulse_breaks(GratingMethod method, double period, int count) {
  std::vector<double> out;
  if (method == GratingMethod::SC)
    for (int i = 1; i < count; ++i) out.push_back(period * i / count);
  return out;
}

}  // namespace

cplx GratingDensity::operator()(double x1) const {
  const double L = profile.period();
  const int count = static_cast<int>(modes.size());
  if (method == GratingMethod::SC) {
    const double shift = std::floor(x1 / L);
    double t = x1 - shift * L;
    if (t >= L) t = std::nextafter(L, 0.0);
    const int cell = std::min(count - 1, static_cast<int>(std::floor(t / (L / count))));
    return coefficients[cell] * std::exp(I * (k * std::sin(theta_inc) * L * shift));
  }
  const Vec2 x(x1, profile.f(x1));
  cplx sum = 0.0;
  for (int m = 0; m < count; ++m) sum += coefficients[m] * trial_value(method, k, modes[m], m, count, L, x);
  return sum;
}

GratingSolution grating_assemble_solve(GratingMethod method, const GratingProfile& profile, double k,
                                       double theta_inc, const std::vector<int>& modes,
                                       const GratingOptions& options) {
  const double L = profile.period();
  check_grating_args(k, L, theta_inc);
  if (modes.empty()) throw ConfigError("grating: at least one mode is required");
  std::vector<int> sorted = modes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("grating: mode indices must be distinct");
  if (!std::binary_search(sorted.begin(), sorted.end(), 0))
    throw ConfigError("grating: the mode set must contain n = 0");

  const int N = static_cast<int>(modes.size());
  std::vector<RayleighMode> rm;
  int n_prop = 0;
  for (int n : modes) {
    rm.push_back(rayleigh_mode(k, L, theta_inc, n));
    if (rm.back().propagating()) ++n_prop;
  }
  const double beta0 = std::cos(theta_inc);
  const cplx R = options.rhs == GratingRhs::Calibrated ? -2.0 * I * k * beta0 * L : -2.0 * I * k * L;

  const auto t0 = std::chrono::steady_clock::now();
  const auto nodes = grating_nodes(profile, pulse_breaks(method, L, N), grating_rate(k, profile, rm),
                                   options.gauss_order);
  const int Q = static_cast<int>(nodes.size());

  auto describe = [&](const std::string& what) {
    std::ostringstream msg;
    msg << "grating " << to_string(method) << ": " << what << " with N = " << N << " modes (" << n_prop
        << " propagating, " << N - n_prop << " evanescent)";
    return msg.str();
  };

  if (method == GratingMethod::SSstar) {
    MatrixXcl V(Q, N);
    for (int q = 0; q < Q; ++q)
      for (int m = 0; m < N; ++m) V(q, m) = wave_value_l(k, -rm[m].alpha, rm[m].beta, nodes[q].x);
    // a_jm = int conj(v_m) v_j ds
    MatrixXcl A(N, N);
    for (int j = 0; j < N; ++j)
      for (int m = 0; m < N; ++m) {
        cplxl a = 0.0L;
        for (int q = 0; q < Q; ++q) a += static_cast<long double>(nodes[q].w) * std::conj(V(q, m)) * V(q, j);
        A(j, m) = a;
      }
    VectorXcl rhs = VectorXcl::Zero(N);
    for (int j = 0; j < N; ++j)
      if (modes[j] == 0) rhs[j] = cplxl(R);
    const double assembly_s = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    const HermitianResult sol = solve_hermitian(A, rhs, describe("SS* system"));
    return {GratingDensity{profile, k, theta_inc, method, rm, sol.x},
            GramSystem{to_double(A), to_double(rhs), true, sol.cond, sol.min_eigenvalue, sol.defect},
            LinearSystemReport{N, sol.cond, assembly_s, seconds_since(t1)}, n_prop};
  }

  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  for (int q = 0; q < Q; ++q) {
    const auto& nd = nodes[q];
    for (int j = 0; j < N; ++j) {
      const cplx vj = std::exp(I * k * (-rm[j].alpha * nd.x.x() + rm[j].beta * nd.x.y()));
      for (int m = 0; m < N; ++m) A(j, m) += nd.w * trial_value(method, k, rm[m], m, N, L, nd.x) * vj;
    }
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
  for (int j = 0; j < N; ++j)
    if (modes[j] == 0) rhs[j] = R;
  const double assembly_s = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  double cond = 1.0;
  Eigen::VectorXcd c;
  try {
    c = solve_dense(A, rhs, cond);
  } catch (const NumericalError& e) {
    throw NumericalError(describe(e.what()));
  }
  if (cond > 1e14) throw NumericalError(describe("system too ill-conditioned (condition number " + std::to_string(cond) + ")"));
  return {GratingDensity{profile, k, theta_inc, method, rm, c}, GramSystem{A, rhs, false, cond, 0.0, 0.0},
          LinearSystemReport{N, cond, assembly_s, seconds_since(t1)}, n_prop};
}

double grating_l2_norm(const GratingProfile& profile, const std::function<cplx(double)>& f, double rate,
                       int gauss_order) {
  double sum = 0.0;
  for (const auto& nd : grating_nodes(profile, {}, rate, gauss_order)) sum += nd.w * std::norm(f(nd.x1));
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

double RayleighCoefficients::efficiency(int n) const {
  const RayleighMode& m = spectrum.mode(n);
  if (!m.propagating()) return 0.0;
  const auto it = c.find(n);
  if (it == c.end()) return 0.0;
  return m.beta.real() / std::cos(spectrum.theta_inc) * std::norm(it->second);
}

namespace {

RayleighCoefficients extract(const std::function<cplx(double)>& density, const GratingProfile& profile,
                             const RayleighSpectrum& spectrum, std::vector<double> breaks, double rate,
                             int gauss_order) {
  if (std::fabs(spectrum.period - profile.period()) > 1e-12 * profile.period())
    throw ConfigError("Rayleigh coefficients: spectrum and profile periods differ");
  for (const auto& m : spectrum.modes)
    if (std::abs(m.beta) == 0.0)
      throw DomainError("Rayleigh coefficients: mode " + std::to_string(m.n) + " is grazing (beta_n = 0)");
  const double k = spectrum.k, L = profile.period();
  const auto nodes = grating_nodes(profile, std::move(breaks), rate, gauss_order);
  std::vector<cplx> phi;
  phi.reserve(nodes.size());
  for (const auto& nd : nodes) phi.push_back(density(nd.x1));
  RayleighCoefficients out;
  out.spectrum = spectrum;
  for (const auto& m : spectrum.modes) {
    cplx sum = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q)
      sum += nodes[q].w * phi[q] * std::exp(-I * k * (m.alpha * nodes[q].x.x() + m.beta * nodes[q].x.y()));
    out.c[m.n] = sum / (2.0 * I * k * m.beta * L);
  }
  return out;
}

}  // namespace

RayleighCoefficients rayleigh_coefficients(const std::function<cplx(double)>& density,
                                           const GratingProfile& profile, const RayleighSpectrum& spectrum,
                                           int gauss_order) {
  return extract(density, profile, spectrum, {}, grating_rate(spectrum.k, profile, spectrum.modes), gauss_order);
}

RayleighCoefficients rayleigh_coefficients(const GratingDensity& density, int n_min, int n_max) {
  const RayleighSpectrum spectrum = rayleigh_modes(density.k, density.profile.period(), density.theta_inc, n_min, n_max);
  std::vector<RayleighMode> all = spectrum.modes;
  all.insert(all.end(), density.modes.begin(), density.modes.end());
  return extract([&](double x1) { return density(x1); }, density.profile, spectrum,
                 pulse_breaks(density.method, density.profile.period(), static_cast<int>(density.modes.size())),
                 grating_rate(density.k, density.profile, all), 20);
}

double energy_balance(const RayleighCoefficients& coeffs) {
  if (!(std::cos(coeffs.spectrum.theta_inc) > 0.0)) throw DomainError("energy balance: beta_0 = 0");
  double sum = 0.0;
  for (const auto& m : coeffs.spectrum.modes)
    if (m.propagating()) sum += coeffs.efficiency(m.n);
  return sum;
}

}  // namespace hnabem
