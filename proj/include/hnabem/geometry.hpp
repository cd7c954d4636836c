#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hnabem/common.hpp"

namespace hnabem {

/// Time-harmonic plane wave u^I(x) = amplitude * exp(i k x.a).
struct Incidence {
  double k = 1.0;
  Vec2 direction{0.0, -1.0};
  double amplitude = 1.0;

  Incidence() = default;
  Incidence(double k, Vec2 direction, double amplitude = 1.0);

  /// Direction (sin theta, -cos theta): theta measured anticlockwise from the
  /// downward vertical.
  static Incidence from_angle(double k, double theta, double amplitude = 1.0);

  cplx field(const Vec2& x) const;
  /// Gradient of u^I at x.
  Eigen::Vector2cd gradient(const Vec2& x) const;
  cplx normal_derivative(const Vec2& x, const Vec2& normal) const;
};

/// Straight boundary piece parametrized by arclength s in [0, length].
struct Segment {
  Vec2 start;
  Vec2 end;
  double length = 0.0;
  Vec2 tangent;
  Vec2 normal;  // outward (polygon) or +x2 (screen)

  Segment() = default;
  Segment(const Vec2& a, const Vec2& b, const Vec2& normal);

  /// Endpoints are returned bit-exactly for s == 0 and s == length.
  Vec2 point(double s) const;
};

/// Boundary made of straight sides; closed for polygons.
struct Boundary {
  std::vector<Segment> sides;
  bool closed = false;

  double total_length() const;
  double diameter() const;
  int size() const { return static_cast<int>(sides.size()); }
};

class Screen {
 public:
  explicit Screen(double length);

  double length() const { return length_; }
  Vec2 point(double s) const { return {s, 0.0}; }
  Vec2 normal() const { return {0.0, 1.0}; }
  const Boundary& boundary() const { return boundary_; }

 private:
  double length_;
  Boundary boundary_;
};

Screen make_screen(double length);

class ConvexPolygon {
 public:
  /// Vertices counterclockwise, strictly convex; throws GeometryError naming
  /// the offending vertex otherwise.
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  int num_sides() const { return static_cast<int>(vertices_.size()); }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Segment& side(int j) const { return boundary_.sides[j]; }
  const Boundary& boundary() const { return boundary_; }

  /// Exterior angle at vertex j, in (pi, 2pi).
  double exterior_angle(int j) const { return exterior_angles_[j]; }
  /// Corner exponent at the start of side j: 1 - pi/omega_j.
  double delta_plus(int j) const;
  /// Corner exponent at the end of side j: 1 - pi/omega_{j+1}.
  double delta_minus(int j) const;

  double perimeter() const { return boundary_.total_length(); }
  Vec2 centroid() const;
  ConvexPolygon translated(const Vec2& shift) const;
  /// min_j x.nu_j over the sides (constant on each side).
  double min_support() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<double> exterior_angles_;
  Boundary boundary_;
};

ConvexPolygon make_polygon(const std::vector<Vec2>& vertices);
ConvexPolygon make_equilateral_triangle(double side, bool centered = true);
ConvexPolygon make_regular_polygon(int sides, double radius, double rotation = 0.0);

enum class Illumination { Illuminated, Shadow };

/// |a.nu| below this counts as grazing (rounding in the side normals).
inline constexpr double grazing_tolerance = 1e-12;

/// Side j is illuminated iff a.nu_j < 0; grazing incidence counts as shadow.
std::vector<Illumination> classify_sides(const ConvexPolygon& poly, const Incidence& inc);

/// Periodic profile x2 = f(x1) with period L.
class GratingProfile {
 public:
  enum class Kind { Flat, Sinusoid, Sampled };

  static GratingProfile flat(double period);
  /// f(x) = amplitude * sin(2 pi x / period).
  static GratingProfile sinusoid(double period, double amplitude);
  /// Periodic cubic spline through (x_i, f_i); x_0 = 0, x_last = period and
  /// f_0 == f_last are required.
  static GratingProfile sampled(const std::vector<double>& x, const std::vector<double>& f);
  /// Two-column CSV "x,f" (an optional header line is skipped).
  static GratingProfile from_csv(const std::string& path);

  Kind kind() const { return kind_; }
  double period() const { return period_; }
  double amplitude() const { return amplitude_; }
  double f(double x) const;
  double df(double x) const;
  double f_plus() const { return f_plus_; }
  double max_slope() const { return max_slope_; }
  /// Surface element sqrt(1 + f'^2).
  double jacobian(double x) const;
  /// Upward unit normal (-f', 1)/sqrt(1 + f'^2).
  Vec2 normal(double x) const;
  /// Arclength of one period.
  double arclength() const;
  /// Spline nodes of a sampled profile (empty otherwise).
  const std::vector<double>& knots() const { return xs_; }

 private:
  GratingProfile() = default;
  void finish();

  Kind kind_ = Kind::Flat;
  double period_ = 0.0;
  double amplitude_ = 0.0;
  std::vector<double> xs_, fs_, second_;  // spline data
  double f_plus_ = 0.0;
  double max_slope_ = 0.0;
};

/// Shape description accepted from configuration.
struct GratingShape {
  std::string name = "flat";  // flat | sinusoid | sampled
  double amplitude = 0.0;
  std::vector<double> x, f;  // sampled nodes
};

GratingProfile make_grating(double period, const GratingShape& shape);

}  // namespace hnabem
