#include "hnabem/hna.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace hnabem {

GradedMesh geometric_mesh(double L, int n, double sigma) {
  if (!(L > 0.0)) throw ConfigError("geometric_mesh: length must be > 0");
  if (n < 1) throw ConfigError("geometric_mesh: at least one layer is required");
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("geometric_mesh: grading must lie in (0, 1)");
  GradedMesh mesh{L, n, sigma, {}};
  mesh.points.resize(n + 1);
  mesh.points[0] = 0.0;
  mesh.points[n] = L;
  double x = L;
  for (int i = n - 1; i >= 1; --i) {
    x *= sigma;
    mesh.points[i] = x;
  }
  return mesh;
}

cplx physical_optics(const Boundary& boundary, const Incidence& inc, int side, double s) {
  const Segment& seg = boundary.sides.at(side);
  const double a_nu = inc.direction.dot(seg.normal);
  if (boundary.closed && a_nu >= -grazing_tolerance) return 0.0;
  return 2.0 * inc.normal_derivative(seg.point(s), seg.normal);
}

// ---------------------------------------------------------------------------

HnaSpace::HnaSpace(Boundary boundary, double k, HnaSpaceSpec spec, std::vector<Element> elements,
                   std::vector<HnaBasisFn> basis)
    : boundary_(std::move(boundary)), k_(k), spec_(std::move(spec)), elements_(std::move(elements)),
      basis_(std::move(basis)) {
  int off = 0;
  for (const auto& e : elements_) {
    offsets_.push_back(off);
    off += e.size();
  }
  spec_.dimension = off;
}

namespace {

void add_side(int side, double L, double k, int p, int n, double sigma, std::vector<Element>& elements,
              std::vector<HnaBasisFn>& basis) {
  (void)k;
  const GradedMesh mesh = geometric_mesh(L, n, sigma);
  for (int i = 0; i < n; ++i) {
    elements.push_back({side, mesh.points[i], mesh.points[i + 1], 1.0, p});
    for (int d = 0; d <= p; ++d) basis.push_back({side, Direction::Plus, i, d});
  }
  for (int i = 0; i < n; ++i) {
    const double a = i + 1 == n ? 0.0 : L - mesh.points[i + 1];
    const double b = i == 0 ? L : L - mesh.points[i];
    elements.push_back({side, a, b, -1.0, p});
    for (int d = 0; d <= p; ++d) basis.push_back({side, Direction::Minus, i, d});
  }
}

void check_space_args(double k, int p, int n, double sigma) {
  if (!(k > 0.0)) throw ConfigError("HNA space: wavenumber must be > 0");
  if (p < 0 || p > 20) throw ConfigError("HNA space: degree p must lie in [0, 20]");
  if (n < 1) throw ConfigError("HNA space: at least one layer is required");
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("HNA space: grading must lie in (0, 1)");
}

}  // namespace

HnaSpace build_hna_space(const Screen& screen, double k, int p, int n, double sigma) {
  check_space_args(k, p, n, sigma);
  std::vector<Element> elements;
  std::vector<HnaBasisFn> basis;
  add_side(0, screen.length(), k, p, n, sigma, elements, basis);
  HnaSpaceSpec spec{p, n, sigma, 0, {}, {}};
  return HnaSpace(screen.boundary(), k, spec, std::move(elements), std::move(basis));
}

HnaSpace build_hna_space(const ConvexPolygon& poly, double k, int p, int n, double sigma) {
  check_space_args(k, p, n, sigma);
  std::vector<Element> elements;
  std::vector<HnaBasisFn> basis;
  HnaSpaceSpec spec{p, n, sigma, 0, {}, {}};
  for (int j = 0; j < poly.num_sides(); ++j) {
    add_side(j, poly.side(j).length, k, p, n, sigma, elements, basis);
    spec.delta_plus.push_back(poly.delta_plus(j));
    spec.delta_minus.push_back(poly.delta_minus(j));
  }
  return HnaSpace(poly.boundary(), k, spec, std::move(elements), std::move(basis));
}

// ---------------------------------------------------------------------------

BoundaryDensity::BoundaryDensity(Boundary boundary, double k, std::vector<Element> elements,
                                 Eigen::VectorXcd coefficients, DensityTag tag)
    : boundary_(std::move(boundary)), k_(k), elements_(std::move(elements)), coeffs_(std::move(coefficients)),
      tag_(tag) {
  int off = 0;
  by_side_.assign(boundary_.size(), {});
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Element& el = elements_[e];
    if (el.side < 0 || el.side >= boundary_.size()) throw ConfigError("density element refers to a missing side");
    offsets_.push_back(off);
    off += el.size();
    by_side_[el.side].push_back(static_cast<int>(e));
  }
  if (off != coeffs_.size()) throw ConfigError("density: coefficient count does not match the basis dimension");
  max_length_.assign(boundary_.size(), 0.0);
  for (int j = 0; j < boundary_.size(); ++j) {
    auto& list = by_side_[j];
    std::stable_sort(list.begin(), list.end(), [&](int x, int y) { return elements_[x].a < elements_[y].a; });
    for (int e : list) max_length_[j] = std::max(max_length_[j], elements_[e].length());
  }
}

cplx BoundaryDensity::operator()(int side, double s) const {
  cplx sum = 0.0;
  cplx vals[64];
  const double L = boundary_.sides[side].length;
  const auto& list = by_side_[side];
  // elements are sorted by their left end; only those starting in
  // [s - longest, s] can contain s
  auto last = std::upper_bound(list.begin(), list.end(), s, [&](double v, int e) { return v < elements_[e].a; });
  const double reach = s - 1.000001 * max_length_[side];
  for (auto it = last; it != list.begin();) {
    --it;
    const Element& el = elements_[*it];
    if (el.a < reach) break;
    const int e = *it;
    // half-open supports, closed at the side end
    if (s < el.a || s > el.b || (s == el.b && el.b != L)) continue;
    element_basis(el, k_, s, vals);
    for (int l = 0; l < el.size(); ++l) sum += coeffs_[offsets_[e] + l] * vals[l];
  }
  sum *= scale_;
  if (has_po_) sum += physical_optics(boundary_, inc_, side, s);
  return sum;
}

std::vector<double> BoundaryDensity::breakpoints(int side) const {
  std::vector<double> pts{0.0, boundary_.sides[side].length};
  for (int e : by_side_[side]) {
    pts.push_back(elements_[e].a);
    pts.push_back(elements_[e].b);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double BoundaryDensity::phase_rate() const {
  double r = has_po_ ? 1.0 : 0.0;
  for (const auto& e : elements_) r = std::max(r, std::fabs(e.phase_rate));
  return r;
}

BoundaryDensity BoundaryDensity::with_physical_optics(const Incidence& inc, double scale) const {
  BoundaryDensity out = *this;
  out.tag_ = DensityTag::FullNeumann;
  out.scale_ = scale;
  out.has_po_ = true;
  out.inc_ = inc;
  return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXcd assemble_galerkin_matrix(const PairingEngine& engine, const std::vector<Element>& elements) {
  std::vector<int> offsets;
  int N = 0;
  for (const auto& e : elements) {
    offsets.push_back(N);
    N += e.size();
  }
  Eigen::MatrixXcd M(N, N);
  for (std::size_t j = 0; j < elements.size(); ++j)
    for (std::size_t i = 0; i < elements.size(); ++i)
      M.block(offsets[i], offsets[j], elements[i].size(), elements[j].size()) = engine.block(elements[j], elements[i]);
  return M;
}

Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& rhs, double& cond) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > smax * 1e-15)) {
    std::ostringstream msg;
    msg << "singular Galerkin system (condition number " << cond << ")";
    throw NumericalError(msg.str());
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  Eigen::VectorXcd c = lu.solve(rhs);
  if (!c.allFinite()) throw NumericalError("non-finite solution of the Galerkin system");
  return c;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Physical Optics on one side as a single degree-0 element with coefficient.
struct PoPiece {
  Element element;
  cplx coefficient;
};

std::vector<PoPiece> physical_optics_pieces(const Boundary& boundary, const Incidence& inc) {
  std::vector<PoPiece> out;
  for (int j = 0; j < boundary.size(); ++j) {
    const Segment& seg = boundary.sides[j];
    const double a_nu = inc.direction.dot(seg.normal);
    if (boundary.closed && a_nu >= -grazing_tolerance) continue;
    // Psi(s) = 2ik(a.nu) exp(ik P.a) exp(ik (tau.a) s), and b_0 = exp(ik (tau.a) s)/sqrt(L)
    const cplx c = 2.0 * I * inc.k * a_nu * inc.amplitude * std::exp(I * (inc.k * seg.start.dot(inc.direction))) *
                   std::sqrt(seg.length);
    out.push_back({Element{j, 0.0, seg.length, seg.tangent.dot(inc.direction), 0}, c});
  }
  return out;
}

}  // namespace

HnaSolution assemble_and_solve(const HnaSpace& space, Formulation formulation, const Incidence& inc,
                               const QuadBudget& budget) {
  const Boundary& boundary = space.boundary();
  const double k = space.wavenumber();
  if (std::fabs(inc.k - k) > 1e-12 * k) throw ConfigError("incident wavenumber differs from the space wavenumber");
  if (formulation == Formulation::ScreenSingleLayer && boundary.closed)
    throw ConfigError("the screen formulation needs an open boundary");
  if (formulation == Formulation::PolygonStarCombined) {
    if (!boundary.closed) throw ConfigError("the star-combined formulation needs a closed polygon");
    for (int j = 0; j < boundary.size(); ++j)
      if (!(boundary.sides[j].start.dot(boundary.sides[j].normal) > 0.0))
        throw GeometryError("polygon is not star-shaped about the origin (x.nu <= 0 on side " + std::to_string(j) +
                                "); recenter it, e.g. at its centroid",
                            j);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const OperatorKind kind =
      formulation == Formulation::ScreenSingleLayer ? OperatorKind::SingleLayer : OperatorKind::StarCombined;
  PairingEngine engine(boundary, k, kind, Coupling::star(), budget);
  const auto& elements = space.elements();
  const int N = space.dimension();
  Eigen::MatrixXcd M = assemble_galerkin_matrix(engine, elements);

  // Right-hand side (1/k) < g - A Psi, w > with g = u^I (screen) or
  // g = x.grad u^I - i eta u^I (star-combined).
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
  std::function<cplx(int, double, const Vec2&)> g;
  if (formulation == Formulation::ScreenSingleLayer) {
    g = [&](int, double, const Vec2& x) { return inc.field(x); };
  } else {
    g = [&](int, double, const Vec2& x) {
      const cplx u = inc.field(x);
      const cplx eta(k * x.norm(), 0.5);
      return I * k * x.dot(inc.direction) * u - I * eta * u;
    };
  }
  const auto po = physical_optics_pieces(boundary, inc);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    Eigen::VectorXcd r = project_onto(boundary, elements[i], k, g, 1.0, budget);
    for (const auto& piece : po) r -= piece.coefficient * engine.block(piece.element, elements[i]).col(0);
    rhs.segment(space.offset(static_cast<int>(i)), elements[i].size()) = r / k;
  }
  const double assembly_s = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  double cond = 1.0;
  Eigen::VectorXcd c = solve_dense(M, rhs, cond);
  const double solve_s = seconds_since(t1);

  BoundaryDensity phi(boundary, k, elements, c, DensityTag::ScaledPhi);
  return {std::move(phi), {N, cond, assembly_s, solve_s}, std::move(M), std::move(rhs)};
}

BoundaryDensity reconstruct_neumann(const BoundaryDensity& phi, const Incidence& inc) {
  if (phi.tag() != DensityTag::ScaledPhi) throw ConfigError("reconstruct_neumann expects a scaled-phi density");
  return phi.with_physical_optics(inc, phi.wavenumber());
}

namespace {

void require_full(const BoundaryDensity& d, const char* who) {
  if (d.tag() != DensityTag::FullNeumann) throw ConfigError(std::string(who) + " expects a full Neumann density");
}

}  // namespace

cplx domain_field(const BoundaryDensity& neumann, const Incidence& inc, const Vec2& x, const QuadBudget& budget) {
  require_full(neumann, "domain_field");
  const Boundary& boundary = neumann.boundary();
  const TargetPoint target = TargetPoint::free(x);
  const double exclusion = 1e-6 * std::max(boundary.diameter(), 1e-300);
  for (int j = 0; j < boundary.size(); ++j)
    if (distance_to(boundary, j, 0.0, boundary.sides[j].length, target) < exclusion)
      throw DomainError("domain_field: evaluation point lies on or too close to the boundary");
  const double k = neumann.wavenumber();
  const double rate = neumann.phase_rate();
  cplx u = inc.field(x);
  for (int j = 0; j < boundary.size(); ++j) {
    const auto pts = neumann.breakpoints(j);
    auto density = [&](double s) { return neumann(j, s); };
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      u -= layer_potential(boundary, j, pts[i], pts[i + 1], k, KernelKind::Phi, density, rate, target, budget);
  }
  return u;
}

std::vector<cplx> far_field(const BoundaryDensity& neumann, const std::vector<Vec2>& directions,
                            const QuadBudget& budget) {
  require_full(neumann, "far_field");
  for (const auto& d : directions)
    if (std::fabs(d.norm() - 1.0) > 1e-12) throw DomainError("far_field: directions must be unit vectors");
  const Boundary& boundary = neumann.boundary();
  const double k = neumann.wavenumber();
  const double rate = k * (neumann.phase_rate() + 1.0);
  std::vector<cplx> F(directions.size(), 0.0);
  QuadPoints pts;
  for (int j = 0; j < boundary.size(); ++j) {
    const Segment& seg = boundary.sides[j];
    const auto bp = neumann.breakpoints(j);
    pts.clear();
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) append_oscillatory(bp[i], bp[i + 1], rate, budget, pts);
    for (const auto& p : pts) {
      const double s = p.position();
      const cplx v = neumann(j, s) * p.weight;
      const Vec2 y = seg.point(s);
      for (std::size_t d = 0; d < directions.size(); ++d) F[d] -= std::exp(-I * (k * directions[d].dot(y))) * v;
    }
  }
  return F;
}

namespace {

struct NormParts {
  double num = 0.0, den = 0.0;
};

NormParts norm_parts(const BoundaryDensity& a, const BoundaryDensity& b, int side, double u, double v, Norm norm,
                     const QuadRule& rule) {
  NormParts out;
  const double half = 0.5 * (v - u), mid = 0.5 * (u + v);
  for (int i = 0; i < rule.size(); ++i) {
    const double s = mid + half * rule.nodes[i];
    const double w = half * rule.weights[i];
    const cplx vb = b(side, s);
    const double diff = std::abs(a(side, s) - vb);
    if (norm == Norm::L1) {
      out.num += w * diff;
      out.den += w * std::abs(vb);
    } else {
      out.num += w * diff * diff;
      out.den += w * std::norm(vb);
    }
  }
  return out;
}

// |a - b| has near-kinks wherever the difference passes close to zero, so
// panels are bisected until both parts settle.
NormParts adaptive_parts(const BoundaryDensity& a, const BoundaryDensity& b, int side, double u, double v, Norm norm,
                         const QuadRule& rule, const NormParts& whole, double tol, int depth) {
  const double m = 0.5 * (u + v);
  const NormParts left = norm_parts(a, b, side, u, m, norm, rule);
  const NormParts right = norm_parts(a, b, side, m, v, norm, rule);
  NormParts both{left.num + right.num, left.den + right.den};
  const bool settled = std::fabs(both.num - whole.num) <= tol && std::fabs(both.den - whole.den) <= tol;
  if (settled || depth >= 30 || !(m > u && m < v)) return both;
  const NormParts l = adaptive_parts(a, b, side, u, m, norm, rule, left, tol, depth + 1);
  const NormParts r = adaptive_parts(a, b, side, m, v, norm, rule, right, tol, depth + 1);
  return {l.num + r.num, l.den + r.den};
}

}  // namespace

double relative_error(const BoundaryDensity& a, const BoundaryDensity& b, Norm norm, const QuadBudget& budget) {
  const Boundary& boundary = b.boundary();
  if (a.boundary().size() != boundary.size()) throw ConfigError("relative_error: densities live on different boundaries");
  const double k = b.wavenumber();
  const double rate = k * std::max(a.phase_rate(), b.phase_rate());
  QuadBudget q = budget;
  q.gauss_order = std::max(budget.gauss_order, 16);
  const QuadRule& rule = gauss_rule(q.gauss_order);
  struct Panel {
    int side;
    double u, v;
    NormParts whole;
  };
  std::vector<Panel> panels;
  double scale = 0.0;
  for (int j = 0; j < boundary.size(); ++j) {
    auto bp = a.breakpoints(j);
    const auto bb = b.breakpoints(j);
    bp.insert(bp.end(), bb.begin(), bb.end());
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      const double len = bp[i + 1] - bp[i];
      const int count = std::max(1, static_cast<int>(std::ceil(len * rate * q.points_per_wavelength /
                                                                (2.0 * pi * q.gauss_order))));
      for (int c = 0; c < count; ++c) {
        const double u = bp[i] + len * c / count;
        const double v = c + 1 == count ? bp[i + 1] : bp[i] + len * (c + 1) / count;
        const NormParts whole = norm_parts(a, b, j, u, v, norm, rule);
        scale += whole.num + whole.den;
        panels.push_back({j, u, v, whole});
      }
    }
  }
  const double tol = 1e-12 * scale / static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  double num = 0.0, den = 0.0;
  for (const auto& p : panels) {
    const NormParts part = adaptive_parts(a, b, p.side, p.u, p.v, norm, rule, p.whole, tol, 0);
    num += part.num;
    den += part.den;
  }
  if (!(den > 0.0)) throw DomainError("relative_error: reference density has zero norm");
  return norm == Norm::L1 ? num / den : std::sqrt(num / den);
}

}  // namespace hnabem
