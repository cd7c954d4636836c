#include "hnabem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hnabem {

Incidence::Incidence(double k_, Vec2 dir, double amp) : k(k_), direction(dir), amplitude(amp) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("incidence: wavenumber must be > 0");
  const double norm = direction.norm();
  if (!(norm > 0.0)) throw ConfigError("incidence: direction must be nonzero");
  direction /= norm;
}

Incidence Incidence::from_angle(double k, double theta, double amplitude) {
  return Incidence(k, Vec2(std::sin(theta), -std::cos(theta)), amplitude);
}

cplx Incidence::field(const Vec2& x) const {
  return amplitude * std::exp(I * (k * x.dot(direction)));
}

Eigen::Vector2cd Incidence::gradient(const Vec2& x) const {
  const cplx u = field(x);
  return Eigen::Vector2cd(I * k * direction.x() * u, I * k * direction.y() * u);
}

cplx Incidence::normal_derivative(const Vec2& x, const Vec2& nu) const {
  return I * k * direction.dot(nu) * field(x);
}

Segment::Segment(const Vec2& a, const Vec2& b, const Vec2& nu) : start(a), end(b), normal(nu) {
  length = (b - a).norm();
  if (!(length > 0.0)) throw GeometryError("segment has zero length");
  tangent = (b - a) / length;
}

Vec2 Segment::point(double s) const {
  if (s == 0.0) return start;
  if (s == length) return end;
  return start + s * tangent;
}

double Boundary::total_length() const {
  double total = 0.0;
  for (const auto& side : sides) total += side.length;
  return total;
}

double Boundary::diameter() const {
  double d = 0.0;
  for (const auto& a : sides)
    for (const auto& b : sides) {
      d = std::max(d, (a.start - b.start).norm());
      d = std::max(d, (a.start - b.end).norm());
      d = std::max(d, (a.end - b.end).norm());
    }
  return d;
}

Screen::Screen(double length) : length_(length) {
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("screen: length must be > 0");
  boundary_.sides.emplace_back(Vec2(0.0, 0.0), Vec2(length, 0.0), Vec2(0.0, 1.0));
  boundary_.closed = false;
}

Screen make_screen(double length) { return Screen(length); }

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const int n = static_cast<int>(vertices_.size());
  if (n < 3) throw GeometryError("polygon: at least 3 vertices are required");
  double scale = 0.0;
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw GeometryError("polygon: non-finite vertex");
    scale = std::max(scale, v.norm());
  }
  for (int j = 0; j < n; ++j) {
    const Vec2& prev = vertices_[(j + n - 1) % n];
    const Vec2& cur = vertices_[j];
    const Vec2& next = vertices_[(j + 1) % n];
    const Vec2 e0 = cur - prev, e1 = next - cur;
    if (e0.norm() <= 1e-14 * std::max(scale, 1.0) || e1.norm() <= 1e-14 * std::max(scale, 1.0))
      throw GeometryError("polygon: repeated vertex " + std::to_string(j), j);
    const double cross = e0.x() * e1.y() - e0.y() * e1.x();
    if (!(cross > 1e-12 * e0.norm() * e1.norm()))
      throw GeometryError("polygon: vertex " + std::to_string(j) +
                              " breaks strict convexity or counterclockwise order",
                          j);
    // interior angle = pi - turning angle; exterior angle = 2 pi - interior
    const double turn = std::atan2(cross, e0.dot(e1));
    exterior_angles_.push_back(pi + turn);
  }
  double total_turn = 0.0;
  for (double w : exterior_angles_) total_turn += w - pi;
  if (std::fabs(total_turn - 2.0 * pi) > 1e-9)
    throw GeometryError("polygon: boundary winds more than once");
  for (int j = 0; j < n; ++j) {
    const Vec2& a = vertices_[j];
    const Vec2& b = vertices_[(j + 1) % n];
    const Vec2 t = (b - a).normalized();
    boundary_.sides.emplace_back(a, b, Vec2(t.y(), -t.x()));
  }
  boundary_.closed = true;
}

double ConvexPolygon::delta_plus(int j) const { return 1.0 - pi / exterior_angles_[j]; }

double ConvexPolygon::delta_minus(int j) const {
  return 1.0 - pi / exterior_angles_[(j + 1) % num_sides()];
}

Vec2 ConvexPolygon::centroid() const {
  // area-weighted centroid
  double area = 0.0;
  Vec2 c(0.0, 0.0);
  const int n = num_sides();
  for (int j = 0; j < n; ++j) {
    const Vec2& a = vertices_[j];
    const Vec2& b = vertices_[(j + 1) % n];
    const double cross = a.x() * b.y() - b.x() * a.y();
    area += cross;
    c += cross * (a + b);
  }
  return c / (3.0 * area);
}

ConvexPolygon ConvexPolygon::translated(const Vec2& shift) const {
  std::vector<Vec2> moved = vertices_;
  for (auto& v : moved) v += shift;
  return ConvexPolygon(std::move(moved));
}

double ConvexPolygon::min_support() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& side : boundary_.sides) m = std::min(m, side.start.dot(side.normal));
  return m;
}

ConvexPolygon make_polygon(const std::vector<Vec2>& vertices) { return ConvexPolygon(vertices); }

ConvexPolygon make_equilateral_triangle(double side, bool centered) {
  if (!(side > 0.0)) throw ConfigError("triangle: side length must be > 0");
  ConvexPolygon tri({Vec2(0.0, 0.0), Vec2(side, 0.0), Vec2(side / 2.0, side * std::sqrt(3.0) / 2.0)});
  if (!centered) return tri;
  return tri.translated(-tri.centroid());
}

ConvexPolygon make_regular_polygon(int sides, double radius, double rotation) {
  if (sides < 3) throw ConfigError("regular polygon: at least 3 sides");
  if (!(radius > 0.0)) throw ConfigError("regular polygon: radius must be > 0");
  std::vector<Vec2> v;
  for (int j = 0; j < sides; ++j) {
    const double t = rotation + 2.0 * pi * j / sides;
    v.emplace_back(radius * std::cos(t), radius * std::sin(t));
  }
  return ConvexPolygon(std::move(v));
}

std::vector<Illumination> classify_sides(const ConvexPolygon& poly, const Incidence& inc) {
  std::vector<Illumination> out;
  for (int j = 0; j < poly.num_sides(); ++j)
    out.push_back(inc.direction.dot(poly.side(j).normal) < -grazing_tolerance ? Illumination::Illuminated
                                                               : Illumination::Shadow);
  return out;
}

// ---------------------------------------------------------------------------
// Grating profiles

GratingProfile GratingProfile::flat(double period) {
  if (!(period > 0.0)) throw ConfigError("grating: period must be > 0");
  GratingProfile g;
  g.kind_ = Kind::Flat;
  g.period_ = period;
  g.finish();
  return g;
}

GratingProfile GratingProfile::sinusoid(double period, double amplitude) {
  if (!(period > 0.0)) throw ConfigError("grating: period must be > 0");
  if (!std::isfinite(amplitude)) throw ConfigError("grating: amplitude must be finite");
  GratingProfile g;
  g.kind_ = Kind::Sinusoid;
  g.period_ = period;
  g.amplitude_ = amplitude;
  g.finish();
  return g;
}

GratingProfile GratingProfile::sampled(const std::vector<double>& x, const std::vector<double>& f) {
  if (x.size() != f.size() || x.size() < 4)
    throw ConfigError("grating: sampled profile needs >= 4 matching (x, f) nodes");
  if (x.front() != 0.0) throw ConfigError("grating: sampled profile must start at x = 0");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw ConfigError("grating: sample abscissae must increase strictly");
  const double period = x.back();
  const double fscale = std::max(1.0, std::fabs(f.front()));
  if (std::fabs(f.front() - f.back()) > 1e-12 * fscale)
    throw ConfigError("grating: sampled profile is not periodic (f(0) != f(L))");
  double slope = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!std::isfinite(f[i])) throw ConfigError("grating: non-finite sample");
    slope = std::max(slope, std::fabs((f[i] - f[i - 1]) / (x[i] - x[i - 1])));
  }
  if (!(slope < 1e6)) throw ConfigError("grating: sampled profile is not Lipschitz");

  GratingProfile g;
  g.kind_ = Kind::Sampled;
  g.period_ = period;
  g.xs_ = x;
  g.fs_ = f;
  g.fs_.back() = g.fs_.front();
  // Periodic cubic spline: second derivatives M_0..M_{m-1}, M_m = M_0.
  const int m = static_cast<int>(x.size()) - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    const int im = (i + m - 1) % m;
    const double h0 = (i == 0) ? x[m] - x[m - 1] : x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double f_prev = (i == 0) ? g.fs_[m - 1] : g.fs_[i - 1];
    A(i, im) += h0 / 6.0;
    A(i, i) += (h0 + h1) / 3.0;
    A(i, (i + 1) % m) += h1 / 6.0;
    rhs(i) = (g.fs_[i + 1] - g.fs_[i]) / h1 - (g.fs_[i] - f_prev) / h0;
  }
  const Eigen::VectorXd M = A.partialPivLu().solve(rhs);
  g.second_.assign(M.data(), M.data() + m);
  g.second_.push_back(M(0));
  g.finish();
  return g;
}

GratingProfile GratingProfile::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("grating: cannot open sample file " + path);
  std::vector<double> xs, fs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (xs.empty()) continue;  // header
      throw ConfigError("grating: malformed sample line '" + line + "'");
    }
    xs.push_back(a);
    fs.push_back(b);
  }
  return sampled(xs, fs);
}

void GratingProfile::finish() {
  f_plus_ = -std::numeric_limits<double>::infinity();
  max_slope_ = 0.0;
  const int samples = 4096;
  for (int i = 0; i <= samples; ++i) {
    const double x = period_ * i / samples;
    f_plus_ = std::max(f_plus_, f(x));
    max_slope_ = std::max(max_slope_, std::fabs(df(x)));
  }
  if (kind_ == Kind::Sinusoid) {
    f_plus_ = std::fabs(amplitude_);
    max_slope_ = 2.0 * pi * std::fabs(amplitude_) / period_;
  }
}

namespace {
double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  return r;
}
}  // namespace

double GratingProfile::f(double x) const {
  switch (kind_) {
    case Kind::Flat:
      return 0.0;
    case Kind::Sinusoid:
      return amplitude_ * std::sin(2.0 * pi * x / period_);
    case Kind::Sampled: {
      const double t = wrap(x, period_);
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
      const int i = std::clamp(static_cast<int>(it - xs_.begin()) - 1, 0, static_cast<int>(xs_.size()) - 2);
      const double h = xs_[i + 1] - xs_[i];
      const double a = (xs_[i + 1] - t) / h, b = (t - xs_[i]) / h;
      return a * fs_[i] + b * fs_[i + 1] +
             ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
    }
  }
  return 0.0;
}

double GratingProfile::df(double x) const {
  switch (kind_) {
    case Kind::Flat:
      return 0.0;
    case Kind::Sinusoid:
      return amplitude_ * 2.0 * pi / period_ * std::cos(2.0 * pi * x / period_);
    case Kind::Sampled: {
      const double t = wrap(x, period_);
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
      const int i = std::clamp(static_cast<int>(it - xs_.begin()) - 1, 0, static_cast<int>(xs_.size()) - 2);
      const double h = xs_[i + 1] - xs_[i];
      const double a = (xs_[i + 1] - t) / h, b = (t - xs_[i]) / h;
      return (fs_[i + 1] - fs_[i]) / h +
             (-(3.0 * a * a - 1.0) * second_[i] + (3.0 * b * b - 1.0) * second_[i + 1]) * h / 6.0;
    }
  }
  return 0.0;
}

double GratingProfile::jacobian(double x) const {
  const double d = df(x);
  return std::sqrt(1.0 + d * d);
}

Vec2 GratingProfile::normal(double x) const {
  const double d = df(x);
  return Vec2(-d, 1.0) / std::sqrt(1.0 + d * d);
}

double GratingProfile::arclength() const {
  // composite Gauss-Legendre, 4-point, on 256 panels
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};
  const int panels = 256;
  const double h = period_ / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < 4; ++q) total += 0.5 * h * gw[q] * jacobian((p + 0.5) * h + 0.5 * h * gx[q]);
  return total;
}

GratingProfile make_grating(double period, const GratingShape& shape) {
  if (!(period > 0.0)) throw ConfigError("grating: period must be > 0");
  if (shape.name == "flat") return GratingProfile::flat(period);
  if (shape.name == "sinusoid") return GratingProfile::sinusoid(period, shape.amplitude);
  if (shape.name == "sampled") {
    if (!shape.x.empty() && std::fabs(shape.x.back() - period) > 1e-12 * period)
      throw ConfigError("grating: sample table must end at x = period");
    return GratingProfile::sampled(shape.x, shape.f);
  }
  throw ConfigError("grating: unknown profile '" + shape.name + "'");
}

}  // namespace hnabem
