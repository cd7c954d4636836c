#include "hnabem/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <sstream>

#include "hnabem/hna.hpp"
#include "hnabem/operators.hpp"
#include "hnabem/oracles.hpp"
#include "hnabem/unified.hpp"

#ifndef HNABEM_VERSION
#define HNABEM_VERSION "0.0.0"
#endif

namespace hnabem {

const char* version_string() { return "hnabem " HNABEM_VERSION; }

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConfigFile

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (key.rfind("manifest.", 0) == 0) continue;
    if (cfg.entries_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ConfigFile cfg = parse(in, path);
  const auto parent = std::filesystem::path(path).parent_path();
  cfg.base_dir_ = parent.empty() ? "." : parent.string();
  return cfg;
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Screen: return "screen";
    case ExperimentKind::Polygon: return "polygon";
    case ExperimentKind::Interior: return "interior";
    case ExperimentKind::Grating: return "grating";
    case ExperimentKind::ConvergenceSweep: return "convergence-sweep";
    case ExperimentKind::GreensCheck: return "greens-check";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Screen, ExperimentKind::Polygon, ExperimentKind::Interior, ExperimentKind::Grating,
                 ExperimentKind::ConvergenceSweep, ExperimentKind::GreensCheck})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown experiment kind '" + name +
                    "' (expected screen, polygon, interior, grating, convergence-sweep or greens-check)");
}

// ---------------------------------------------------------------------------
// Resolution

namespace {

class Reader {
 public:
  Reader(const ConfigFile& file, std::map<std::string, std::string>& echo) : file_(file), echo_(echo) {}

  bool has(const std::string& key) const { return file_.has(key); }

  std::string text(const std::string& key, const std::optional<std::string>& fallback) {
    used_.insert(key);
    const auto it = file_.entries().find(key);
    if (it == file_.entries().end()) {
      if (!fallback) throw ConfigError("missing required key '" + key + "'");
      echo_[key] = *fallback;
      return *fallback;
    }
    echo_[key] = it->second;
    return it->second;
  }

  double real(const std::string& key, std::optional<double> fallback) {
    const std::string s = text(key, fallback ? std::optional<std::string>(format_real(*fallback)) : std::nullopt);
    const double v = to_real(key, s);
    echo_[key] = format_real(v);
    return v;
  }

  int integer(const std::string& key, std::optional<int> fallback) {
    const std::string s = text(key, fallback ? std::optional<std::string>(std::to_string(*fallback)) : std::nullopt);
    const int v = to_int(key, s);
    echo_[key] = std::to_string(v);
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    const std::string s = text(key, fallback ? "true" : "false");
    bool v;
    if (s == "true" || s == "yes" || s == "1" || s == "on") v = true;
    else if (s == "false" || s == "no" || s == "0" || s == "off") v = false;
    else throw ConfigError(key + ": expected true or false, got '" + s + "'");
    echo_[key] = v ? "true" : "false";
    return v;
  }

  std::vector<double> reals(const std::string& key, std::optional<std::string> fallback) {
    std::vector<double> out;
    for (const auto& item : split(text(key, fallback), ',')) out.push_back(to_real(key, item));
    if (out.empty()) throw ConfigError(key + ": list is empty");
    echo_[key] = join<double>(out, format_real);
    return out;
  }

  /// Comma-separated integers; "a..b" expands to a, a+1, ..., b.
  std::vector<int> integers(const std::string& key, std::optional<std::string> fallback) {
    std::vector<int> out;
    for (const auto& item : split(text(key, fallback), ',')) {
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        out.push_back(to_int(key, item));
        continue;
      }
      const int a = to_int(key, item.substr(0, dots)), b = to_int(key, item.substr(dots + 2));
      if (b < a) throw ConfigError(key + ": empty range '" + item + "'");
      for (int i = a; i <= b; ++i) out.push_back(i);
    }
    if (out.empty()) throw ConfigError(key + ": list is empty");
    echo_[key] = join<int>(out, [](const int& i) { return std::to_string(i); });
    return out;
  }

  void check_all_used() const {
    for (const auto& [key, value] : file_.entries())
      if (!used_.count(key)) throw ConfigError("unknown or inapplicable key '" + key + "'");
  }

  static double to_real(const std::string& key, const std::string& s) {
    std::string t = trim(s);
    // a*pi/b with optional a and b
    static const std::regex pi_expr(R"(^([-+]?[0-9.eE+-]*?)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?$)");
    std::smatch m;
    if (std::regex_match(t, m, pi_expr)) {
      const std::string a = m[1].str();
      const double coef = a.empty() || a == "+" ? 1.0 : a == "-" ? -1.0 : to_real(key, a);
      return coef * pi / (m[2].matched ? to_real(key, m[2].str()) : 1.0);
    }
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      if (!std::isfinite(v)) throw std::invalid_argument(t);
      return v;
    } catch (const std::logic_error&) {
      throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
  }

  static int to_int(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    try {
      std::size_t pos = 0;
      const long v = std::stol(t, &pos);
      if (pos != t.size() || v < -1000000000L || v > 1000000000L) throw std::invalid_argument(t);
      return static_cast<int>(v);
    } catch (const std::logic_error&) {
      throw ConfigError(key + ": expected an integer, got '" + s + "'");
    }
  }

 private:
  const ConfigFile& file_;
  std::map<std::string, std::string>& echo_;
  std::set<std::string> used_;
};

bool is_polygon_kind(const std::string& g) { return g == "triangle" || g == "regular-polygon" || g == "polygon"; }

void resolve_geometry(Reader& r, ExperimentConfig& c) {
  std::string fallback;
  switch (c.kind) {
    case ExperimentKind::Screen: fallback = "screen"; break;
    case ExperimentKind::Polygon: fallback = "triangle"; break;
    case ExperimentKind::Interior: fallback = "regular-polygon"; break;
    case ExperimentKind::Grating: fallback = "grating"; break;
    case ExperimentKind::ConvergenceSweep: fallback = "screen"; break;
    case ExperimentKind::GreensCheck: fallback = "triangle"; break;
  }
  c.geometry = r.text("geometry.kind", fallback);
  const std::string& g = c.geometry;

  bool ok = false;
  switch (c.kind) {
    case ExperimentKind::Screen: ok = g == "screen"; break;
    case ExperimentKind::Polygon:
    case ExperimentKind::Interior:
    case ExperimentKind::GreensCheck: ok = is_polygon_kind(g); break;
    case ExperimentKind::Grating: ok = g == "grating"; break;
    case ExperimentKind::ConvergenceSweep: ok = g == "screen" || is_polygon_kind(g); break;
  }
  if (!ok) throw ConfigError(std::string("geometry.kind '") + g + "' is not supported by experiment '" +
                             to_string(c.kind) + "'");

  if (g == "screen" || g == "triangle") {
    c.length = r.real("geometry.length", 2.0 * pi);
    if (!(c.length > 0.0)) throw ConfigError("geometry.length must be > 0");
  } else if (g == "regular-polygon") {
    c.sides = r.integer("geometry.sides", c.kind == ExperimentKind::Interior ? 128 : 64);
    c.radius = r.real("geometry.radius", 1.0);
    if (c.sides < 3) throw ConfigError("geometry.sides must be >= 3");
    if (!(c.radius > 0.0)) throw ConfigError("geometry.radius must be > 0");
  } else if (g == "polygon") {
    const std::string s = r.text("geometry.vertices", std::nullopt);
    std::vector<Vec2> v;
    for (const auto& pair : split(s, ';')) {
      std::istringstream in(pair);
      std::string a, b, extra;
      if (!(in >> a >> b) || (in >> extra)) throw ConfigError("geometry.vertices: expected 'x y; x y; ...'");
      v.emplace_back(Reader::to_real("geometry.vertices", a), Reader::to_real("geometry.vertices", b));
    }
    c.vertices = v;
    std::string echo;
    for (std::size_t i = 0; i < v.size(); ++i)
      echo += (i ? "; " : "") + format_real(v[i].x()) + " " + format_real(v[i].y());
    c.resolved["geometry.vertices"] = echo;
  } else if (g == "grating") {
    c.period = r.real("geometry.period", 2.0 * pi);
    if (!(c.period > 0.0)) throw ConfigError("geometry.period must be > 0");
    c.shape.name = r.text("geometry.profile", std::string("flat"));
    if (c.shape.name == "sinusoid") {
      c.shape.amplitude = r.real("geometry.amplitude", std::nullopt);
    } else if (c.shape.name == "sampled") {
      c.profile_file = r.text("geometry.profile_file", std::nullopt);
    } else if (c.shape.name != "flat") {
      throw ConfigError("geometry.profile must be flat, sinusoid or sampled");
    }
  } else {
    throw ConfigError("unknown geometry.kind '" + g + "'");
  }
}

}  // namespace

ExperimentConfig resolve_config(const ConfigFile& file) {
  ExperimentConfig c;
  Reader r(file, c.resolved);
  c.kind = parse_experiment_kind(r.text("experiment", std::nullopt));
  resolve_geometry(r, c);

  c.k = r.reals("incidence.k", std::nullopt);
  for (double k : c.k)
    if (!(k > 0.0)) throw ConfigError("incidence.k: wavenumbers must be > 0");

  const bool hna = c.kind == ExperimentKind::Screen || c.kind == ExperimentKind::Polygon ||
                   c.kind == ExperimentKind::ConvergenceSweep;

  if (hna || c.kind == ExperimentKind::Grating) {
    c.theta_inc = r.real("incidence.theta", c.kind == ExperimentKind::Grating ? 0.0 : pi / 6);
    if (c.kind == ExperimentKind::Grating && !(std::abs(c.theta_inc) < pi / 2))
      throw ConfigError("incidence.theta: grating incidence must satisfy |theta| < pi/2");
  }

  if (hna) {
    c.p = r.integers("discretization.p", std::string("3"));
    for (int p : c.p)
      if (p < 0 || p > 12) throw ConfigError("discretization.p must lie in [0, 12]");
    const std::string n = r.text("discretization.n", std::string("auto"));
    if (n == "auto") {
      c.n = 0;
    } else {
      c.n = Reader::to_int("discretization.n", n);
      if (c.n < 1 || c.n > 60) throw ConfigError("discretization.n must be 'auto' or lie in [1, 60]");
    }
    c.sigma = r.real("discretization.sigma", 0.15);
    if (!(c.sigma > 0.0 && c.sigma < 1.0)) throw ConfigError("discretization.sigma must lie in (0, 1)");
    const std::string expected = c.geometry == "screen" ? "single-layer" : "star-combined";
    c.method = r.text("discretization.method", expected);
    if (c.method != expected)
      throw ConfigError("discretization.method '" + c.method + "' is not available for geometry '" + c.geometry +
                        "' (use " + expected + ")");

    c.reference = r.text("reference.kind", std::string(c.geometry == "screen" ? "hna" : "standard-bem"));
    if (c.reference == "hna") {
      c.reference_p = r.integer("reference.p", 6);
      if (c.reference_p < 1 || c.reference_p > 12) throw ConfigError("reference.p must lie in [1, 12]");
    } else if (c.reference == "standard-bem") {
      c.reference_dof_per_wavelength = r.real("reference.dof_per_wavelength", 20.0);
      if (!(c.reference_dof_per_wavelength >= 10.0))
        throw ConfigError("reference.dof_per_wavelength must be >= 10");
    } else if (c.reference != "none") {
      throw ConfigError("reference.kind must be none, hna or standard-bem");
    }
  }

  if (c.kind == ExperimentKind::Interior) {
    c.directions = r.integers("discretization.directions", std::string("16"));
    for (int N : c.directions)
      if (N < 1 || N > 200) throw ConfigError("discretization.directions must lie in [1, 200]");
    c.data_angle = r.real("interior.data_angle", 0.0);
  }

  if (c.kind == ExperimentKind::Grating) {
    c.method = r.text("discretization.method", std::string("SS*"));
    for (const auto& m : split(c.method, ',')) parse_grating_method(m);
    c.mode_policy = r.text("discretization.modes", std::string("propagating"));
    if (c.mode_policy == "propagating") {
      c.evanescent = r.integers("discretization.evanescent", std::string("4"));
      for (int e : c.evanescent)
        if (e < 0 || e > 200) throw ConfigError("discretization.evanescent must lie in [0, 200]");
    } else if (c.mode_policy == "symmetric") {
      c.half_width = r.integers("discretization.half_width", std::string("2"));
      for (int h : c.half_width)
        if (h < 0 || h > 200) throw ConfigError("discretization.half_width must lie in [0, 200]");
    } else if (c.mode_policy == "list") {
      c.mode_list = r.integers("discretization.mode_list", std::nullopt);
    } else {
      throw ConfigError("discretization.modes must be propagating, symmetric or list");
    }
    c.grating_rhs = r.text("discretization.rhs", std::string("calibrated"));
    if (c.grating_rhs != "calibrated" && c.grating_rhs != "published")
      throw ConfigError("discretization.rhs must be calibrated or published");
  }

  if (c.kind == ExperimentKind::GreensCheck) {
    c.greens_points = r.integer("greens.points", 20);
    if (c.greens_points < 1 || c.greens_points > 10000) throw ConfigError("greens.points must lie in [1, 10000]");
    if (r.has("greens.source")) {
      const auto z = r.reals("greens.source", std::nullopt);
      if (z.size() != 2) throw ConfigError("greens.source: expected 'x, y'");
      c.greens_source = Vec2(z[0], z[1]);
      c.greens_source_set = true;
    }
    c.seed = static_cast<unsigned long long>(r.integer("seed", 1));
  } else if (r.has("seed")) {
    c.seed = static_cast<unsigned long long>(r.integer("seed", 1));
  }

  if (c.kind != ExperimentKind::Grating && c.kind != ExperimentKind::Interior) {
    c.budget.points_per_wavelength = r.real("quadrature.points_per_wavelength", c.budget.points_per_wavelength);
    c.budget.gauss_order = r.integer("quadrature.gauss_order", c.budget.gauss_order);
    c.budget.singular_layers = r.integer("quadrature.singular_layers", c.budget.singular_layers);
    c.budget.singular_grading = r.real("quadrature.singular_grading", c.budget.singular_grading);
    c.budget.validate();
  } else if (c.kind == ExperimentKind::Grating) {
    c.budget.gauss_order = r.integer("quadrature.gauss_order", 20);
    if (c.budget.gauss_order < 2 || c.budget.gauss_order > 64)
      throw ConfigError("quadrature.gauss_order must lie in [2, 64]");
  }

  c.out_dir = r.text("output.dir", std::string("out"));
  c.timings = r.flag("output.timings", false);
  if (c.kind == ExperimentKind::Screen || c.kind == ExperimentKind::Polygon) {
    c.far_field = r.integer("output.far_field", 0);
    if (c.far_field < 0 || c.far_field > 100000) throw ConfigError("output.far_field must lie in [0, 100000]");
    if (r.has("output.grid")) {
      const auto g = r.reals("output.grid", std::nullopt);
      if (g.size() != 6) throw ConfigError("output.grid: expected 'x0, x1, nx, y0, y1, ny'");
      c.grid = {g[0], g[1], g[3], g[4], static_cast<int>(g[2]), static_cast<int>(g[5])};
      if (c.grid.nx < 1 || c.grid.ny < 1 || c.grid.nx != g[2] || c.grid.ny != g[5] ||
          static_cast<long>(c.grid.nx) * c.grid.ny > 1000000)
        throw ConfigError("output.grid: nx and ny must be positive integers with nx*ny <= 1e6");
    }
  }

  r.check_all_used();
  if (c.geometry == "grating" && c.shape.name == "sampled") {
    const std::filesystem::path p(c.profile_file);
    c.profile_file = p.is_absolute() ? p.string() : (std::filesystem::path(file.base_dir()) / p).string();
  }
  return c;
}

// ---------------------------------------------------------------------------
// Manifest and output

std::string RunManifest::text() const {
  std::ostringstream out;
  out << "manifest.version = " << version << "\n";
  for (const auto& [name, seconds] : timings) out << "manifest.timing." << name << " = " << format_real(seconds) << "\n";
  out << "manifest.outputs = ";
  for (std::size_t i = 0; i < outputs.size(); ++i) out << (i ? ", " : "") << outputs[i];
  out << "\n";
  for (const auto& [key, value] : config) out << key << " = " << value << "\n";
  return out.str();
}

void write_outputs(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  };
  for (const auto& f : result.files) write(f.name, f.content);
  write("manifest.txt", result.manifest.text());
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  Csv& operator<<(double x) { return cell(format_real(x)); }
  Csv& operator<<(int x) { return cell(std::to_string(x)); }
  Csv& operator<<(const std::string& s) { return cell(s); }
  Csv& operator<<(const char* s) { return cell(s); }
  void end_row() {
    out_ << "\n";
    first_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  Csv& cell(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  std::ostringstream out_;
  bool first_ = true;
};

ConvexPolygon make_config_polygon(const ExperimentConfig& c) {
  if (c.geometry == "triangle") return make_equilateral_triangle(c.length);
  if (c.geometry == "regular-polygon") return make_regular_polygon(c.sides, c.radius);
  return make_polygon(c.vertices);
}

std::string method_tag(GratingMethod m) { return m == GratingMethod::SSstar ? "SSstar" : to_string(m); }

struct Context {
  const ExperimentConfig& config;
  ExperimentResult& result;
  double timing(double seconds) const { return config.timings ? seconds : 0.0; }
};

const std::vector<std::string> convergence_columns{"k",          "p",          "n",    "N",          "dof_per_wavelength",
                                                   "rel_err_L1", "rel_err_L2", "cond", "assembly_s", "solve_s"};

bool inside_polygon(const ConvexPolygon& poly, const Vec2& x) {
  for (int j = 0; j < poly.num_sides(); ++j)
    if ((x - poly.side(j).start).dot(poly.side(j).normal) >= 0.0) return false;
  return true;
}

// HNA runs on a screen or convex polygon: one convergence row per (k, p),
// optional far-field and field-grid files.
void run_hna(Context& ctx, bool extras) {
  const ExperimentConfig& c = ctx.config;
  const bool screen = c.geometry == "screen";
  const std::optional<Screen> scr = screen ? std::optional<Screen>(make_screen(c.length)) : std::nullopt;
  const std::optional<ConvexPolygon> poly =
      screen ? std::nullopt : std::optional<ConvexPolygon>(make_config_polygon(c));
  const Boundary& boundary = screen ? scr->boundary() : poly->boundary();
  const Formulation formulation = screen ? Formulation::ScreenSingleLayer : Formulation::PolygonStarCombined;

  auto solve = [&](double k, int p, int n, const Incidence& inc) {
    const HnaSpace space = screen ? build_hna_space(*scr, k, p, n, c.sigma) : build_hna_space(*poly, k, p, n, c.sigma);
    HnaSolution sol = assemble_and_solve(space, formulation, inc, c.budget);
    return std::make_pair(reconstruct_neumann(sol.phi, inc), sol.report);
  };

  Csv conv(convergence_columns);
  Csv far({"k", "p", "theta", "re_F", "im_F", "abs_F"});
  Csv field({"k", "p", "x1", "x2", "re_u", "im_u", "abs_u"});
  for (double k : c.k) {
    const Incidence inc = Incidence::from_angle(k, c.theta_inc);
    std::optional<BoundaryDensity> ref;
    if (c.reference == "hna") {
      ref = solve(k, c.reference_p, 2 * (c.reference_p + 1), inc).first;
    } else if (c.reference == "standard-bem") {
      const ReferenceOptions opts;
      ref = screen ? standard_bem_reference(*scr, inc, c.reference_dof_per_wavelength, opts, c.budget).neumann
                   : standard_bem_reference(*poly, inc, c.reference_dof_per_wavelength, opts, c.budget).neumann;
    }
    for (int p : c.p) {
      const int n = c.n > 0 ? c.n : 2 * (p + 1);
      const auto [neumann, report] = solve(k, p, n, inc);
      const double lambda = 2.0 * pi / k;
      const double e1 = ref ? relative_error(neumann, *ref, Norm::L1, c.budget) : std::nan("");
      const double e2 = ref ? relative_error(neumann, *ref, Norm::L2, c.budget) : std::nan("");
      conv << k << p << n << report.N << report.N * lambda / boundary.total_length() << e1 << e2 << report.cond
           << ctx.timing(report.assembly_s) << ctx.timing(report.solve_s);
      conv.end_row();
      char line[200];
      std::snprintf(line, sizeof line, "k = %g, p = %d, N = %d: cond %.3e, rel_err_L1 %.3e, rel_err_L2 %.3e", k, p,
                    report.N, report.cond, e1, e2);
      ctx.result.summary.push_back(line);

      if (!extras) continue;
      if (c.far_field > 0) {
        std::vector<Vec2> dirs;
        std::vector<double> thetas;
        for (int i = 0; i < c.far_field; ++i) {
          const double t = 2.0 * pi * i / c.far_field;
          thetas.push_back(t);
          dirs.emplace_back(std::cos(t), std::sin(t));
        }
        const auto F = far_field(neumann, dirs, c.budget);
        for (std::size_t i = 0; i < F.size(); ++i) {
          far << k << p << thetas[i] << F[i].real() << F[i].imag() << std::abs(F[i]);
          far.end_row();
        }
      }
      if (c.grid.nx > 0) {
        for (int iy = 0; iy < c.grid.ny; ++iy) {
          for (int ix = 0; ix < c.grid.nx; ++ix) {
            const double x1 = c.grid.nx == 1 ? c.grid.x0 : c.grid.x0 + (c.grid.x1 - c.grid.x0) * ix / (c.grid.nx - 1);
            const double x2 = c.grid.ny == 1 ? c.grid.y0 : c.grid.y0 + (c.grid.y1 - c.grid.y0) * iy / (c.grid.ny - 1);
            const Vec2 x(x1, x2);
            cplx u(std::nan(""), std::nan(""));
            if (screen || !inside_polygon(*poly, x)) {
              try {
                u = domain_field(neumann, inc, x, c.budget);
              } catch (const DomainError&) {
                // on or next to the boundary
              }
            }
            field << k << p << x1 << x2 << u.real() << u.imag() << std::abs(u);
            field.end_row();
          }
        }
      }
    }
  }
  ctx.result.files.push_back({"convergence.csv", conv.str()});
  if (extras && c.far_field > 0) ctx.result.files.push_back({"far_field.csv", far.str()});
  if (extras && c.grid.nx > 0) ctx.result.files.push_back({"field.csv", field.str()});
}

// Relative L1/L2 distance between a plane-wave density and exact boundary data.
std::pair<double, double> interior_errors(const PlaneWaveDensity& d, const BoundaryData& exact, double rate) {
  const QuadRule& g = gauss_rule(20);
  double n1 = 0, d1 = 0, n2 = 0, d2 = 0;
  for (int j = 0; j < d.boundary.size(); ++j) {
    const Segment& side = d.boundary.sides[j];
    const int panels = std::max(1, static_cast<int>(std::ceil(side.length * rate / pi)));
    const double h = side.length / panels;
    for (int pnl = 0; pnl < panels; ++pnl) {
      for (int q = 0; q < g.size(); ++q) {
        const double s = h * (pnl + 0.5 * (g.nodes[q] + 1.0));
        const double w = 0.5 * h * g.weights[q];
        const cplx e = exact(j, s, side.point(s));
        const double diff = std::abs(d(j, s) - e);
        n1 += w * diff;
        d1 += w * std::abs(e);
        n2 += w * diff * diff;
        d2 += w * std::norm(e);
      }
    }
  }
  return {n1 / d1, std::sqrt(n2 / d2)};
}

void run_interior(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const ConvexPolygon poly = make_config_polygon(c);
  const Vec2 d(std::cos(c.data_angle), std::sin(c.data_angle));
  Csv conv(convergence_columns);
  for (double k : c.k) {
    auto h = [&](int, double, const Vec2& x) { return std::exp(I * k * d.dot(x)); };
    auto neumann = [&](int side, double, const Vec2& x) {
      return I * k * d.dot(poly.side(side).normal) * std::exp(I * k * d.dot(x));
    };
    for (int N : c.directions) {
      const InteriorSolution sol = interior_planewave_galerkin(poly, k, h, equispaced_directions(N));
      const auto [e1, e2] = interior_errors(sol.density, neumann, 2.0 * k + 1.0);
      const double lambda = 2.0 * pi / k;
      conv << k << 0 << 0 << N << N * lambda / poly.perimeter() << e1 << e2 << sol.gram.cond
           << ctx.timing(sol.report.assembly_s) << ctx.timing(sol.report.solve_s);
      conv.end_row();
      char line[200];
      std::snprintf(line, sizeof line, "k = %g, N = %d: cond %.3e, min eigenvalue %.3e, rel_err_L2 %.3e", k, N,
                    sol.gram.cond, sol.gram.min_eigenvalue, e2);
      ctx.result.summary.push_back(line);
    }
  }
  ctx.result.files.push_back({"convergence.csv", conv.str()});
}

void run_grating(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  GratingProfile profile = c.shape.name == "sampled" ? GratingProfile::from_csv(c.profile_file)
                                                     : make_grating(c.period, c.shape);
  GratingOptions opts;
  opts.rhs = c.grating_rhs == "published" ? GratingRhs::Published : GratingRhs::Calibrated;
  opts.gauss_order = c.budget.gauss_order;

  Csv report({"method", "k", "L", "theta_inc", "N", "n_prop", "cond", "energy_defect", "runtime_s"});
  int run = 0;
  for (const auto& name : split(c.method, ',')) {
    const GratingMethod method = parse_grating_method(name);
    for (double k : c.k) {
      std::vector<std::vector<int>> sets;
      if (c.mode_policy == "propagating")
        for (int e : c.evanescent) sets.push_back(propagating_plus_evanescent(k, profile.period(), c.theta_inc, e));
      else if (c.mode_policy == "symmetric")
        for (int h : c.half_width) sets.push_back(symmetric_modes(h));
      else
        sets.push_back(c.mode_list);
      for (const auto& modes : sets) {
        const auto t0 = Clock::now();
        const GratingSolution sol = grating_assemble_solve(method, profile, k, c.theta_inc, modes, opts);
        // |alpha_n| <= 1 implies |n| <= kL/pi
        const int reach = static_cast<int>(std::ceil(k * profile.period() / pi)) + 1;
        const auto prop = rayleigh_modes(k, profile.period(), c.theta_inc, -reach, reach).propagating();
        const int lo = std::min(*std::min_element(modes.begin(), modes.end()), prop.front());
        const int hi = std::max(*std::max_element(modes.begin(), modes.end()), prop.back());
        const RayleighCoefficients rc = rayleigh_coefficients(sol.density, lo, hi);
        const double defect = std::abs(energy_balance(rc) - 1.0);
        const double runtime = seconds_since(t0);
        ++run;
        report << method_tag(method) << k << profile.period() << c.theta_inc << static_cast<int>(modes.size())
               << sol.n_propagating << sol.system.cond << defect << ctx.timing(runtime);
        report.end_row();

        Csv table({"n", "alpha_n", "re_beta_n", "im_beta_n", "re_c_n", "im_c_n", "efficiency"});
        for (const auto& m : rc.spectrum.modes) {
          const cplx cn = rc.c.at(m.n);
          table << m.n << m.alpha << m.beta.real() << m.beta.imag() << cn.real() << cn.imag() << rc.efficiency(m.n);
          table.end_row();
        }
        ctx.result.files.push_back({"mode_table_" + method_tag(method) + "_" + std::to_string(run) + ".csv", table.str()});
        char line[200];
        std::snprintf(line, sizeof line, "%s k = %g, N = %zu (%d propagating): cond %.3e, energy defect %.3e",
                      to_string(method), k, modes.size(), sol.n_propagating, sol.system.cond, defect);
        ctx.result.summary.push_back(line);
      }
    }
  }
  ctx.result.files.insert(ctx.result.files.begin(), {"grating_report.csv", report.str()});
}

void run_greens_check(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const ConvexPolygon poly = make_config_polygon(c);
  const Vec2 center = poly.centroid();
  double outer = 0.0, inner = 1e300;
  for (const Vec2& v : poly.vertices()) outer = std::max(outer, (v - center).norm());
  for (int j = 0; j < poly.num_sides(); ++j)
    inner = std::min(inner, -(center - poly.side(j).start).dot(poly.side(j).normal));
  const Vec2 z = c.greens_source_set ? c.greens_source : Vec2(center + 2.0 * outer * Vec2(std::cos(1.0), std::sin(1.0)));
  if (inside_polygon(poly, z) || (z - center).norm() < inner)
    throw ConfigError("greens.source must lie outside the polygon");

  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec2> interior, exterior;
  while (static_cast<int>(interior.size()) < c.greens_points) {
    const double r = 0.9 * inner * std::sqrt(unit(rng)), t = 2.0 * pi * unit(rng);
    interior.push_back(center + r * Vec2(std::cos(t), std::sin(t)));
  }
  while (static_cast<int>(exterior.size()) < c.greens_points) {
    const double r = outer * (1.5 + 1.5 * unit(rng)), t = 2.0 * pi * unit(rng);
    const Vec2 x = center + r * Vec2(std::cos(t), std::sin(t));
    if ((x - z).norm() > 0.5 * outer) exterior.push_back(x);
  }

  Csv out({"k", "region", "x1", "x2", "residual"});
  for (double k : c.k) {
    double worst[2] = {0.0, 0.0};
    const std::vector<Vec2>* sets[2] = {&interior, &exterior};
    const char* names[2] = {"interior", "exterior"};
    for (int which = 0; which < 2; ++which) {
      for (const Vec2& x : *sets[which]) {
        const double res = std::abs(greens_identity_residual(poly, k, z, x, c.budget));
        worst[which] = std::max(worst[which], res);
        out << k << names[which] << x.x() << x.y() << res;
        out.end_row();
      }
    }
    const double worst_in = worst[0], worst_out = worst[1];
    char line[160];
    std::snprintf(line, sizeof line, "k = %g: max residual %.3e (interior), %.3e (exterior)", k, worst_in, worst_out);
    ctx.result.summary.push_back(line);
  }
  ctx.result.files.push_back({"greens_check.csv", out.str()});
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  Context ctx{config, result};
  const auto t0 = Clock::now();
  switch (config.kind) {
    case ExperimentKind::Screen:
    case ExperimentKind::Polygon: run_hna(ctx, true); break;
    case ExperimentKind::ConvergenceSweep: run_hna(ctx, false); break;
    case ExperimentKind::Interior: run_interior(ctx); break;
    case ExperimentKind::Grating: run_grating(ctx); break;
    case ExperimentKind::GreensCheck: run_greens_check(ctx); break;
  }
  result.manifest.version = version_string();
  result.manifest.config = config.resolved;
  result.manifest.timings.emplace_back("total_s", seconds_since(t0));
  for (const auto& f : result.files) result.manifest.outputs.push_back(f.name);
  return result;
}

}  // namespace hnabem
