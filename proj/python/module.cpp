#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hnabem/experiment.hpp"
#include "hnabem/hna.hpp"
#include "hnabem/oracles.hpp"
#include "hnabem/specfun.hpp"
#include "hnabem/unified.hpp"

namespace py = pybind11;
using namespace hnabem;

namespace {

// A solved HNA problem: full Neumann trace plus the data needed to evaluate
// fields from it.
struct HnaResult {
  BoundaryDensity neumann;
  Incidence incidence;
  LinearSystemReport report;
  Eigen::VectorXcd coefficients;

  std::vector<cplx> trace(int side, const std::vector<double>& s) const {
    std::vector<cplx> out;
    out.reserve(s.size());
    for (double x : s) out.push_back(neumann(side, x));
    return out;
  }

  std::vector<cplx> far(const std::vector<double>& theta) const {
    std::vector<Vec2> dirs;
    for (double t : theta) dirs.emplace_back(std::cos(t), std::sin(t));
    return far_field(neumann, dirs);
  }

  std::vector<cplx> total_field(const Eigen::MatrixX2d& points) const {
    std::vector<cplx> out;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      out.push_back(domain_field(neumann, incidence, Vec2(points(i, 0), points(i, 1))));
    return out;
  }
};

HnaResult solve_hna(const HnaSpace& space, Formulation f, const Incidence& inc) {
  HnaSolution sol = assemble_and_solve(space, f, inc);
  return {reconstruct_neumann(sol.phi, inc), inc, sol.report, sol.phi.coefficients()};
}

ConvexPolygon polygon_from(const std::vector<std::array<double, 2>>& vertices) {
  std::vector<Vec2> v;
  for (const auto& p : vertices) v.emplace_back(p[0], p[1]);
  return make_polygon(v);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Helmholtz scattering: HNA boundary elements and unified-transform solvers";
  m.attr("__version__") = version_string();

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("bessel_j", &specfun::bessel_j, py::arg("order"), py::arg("x"));
  m.def("bessel_y", &specfun::bessel_y, py::arg("order"), py::arg("x"));
  m.def("hankel1", &specfun::hankel1, py::arg("order"), py::arg("x"));

  py::class_<LinearSystemReport>(m, "SystemReport")
      .def_readonly("N", &LinearSystemReport::N)
      .def_readonly("cond", &LinearSystemReport::cond)
      .def_readonly("assembly_s", &LinearSystemReport::assembly_s)
      .def_readonly("solve_s", &LinearSystemReport::solve_s);

  py::class_<HnaResult>(m, "HnaResult")
      .def_readonly("report", &HnaResult::report)
      .def_readonly("coefficients", &HnaResult::coefficients)
      .def("neumann", &HnaResult::trace, py::arg("side"), py::arg("s"),
           "Total-field Neumann trace at arclengths s on one side.")
      .def("far_field", &HnaResult::far, py::arg("theta"))
      .def("total_field", &HnaResult::total_field, py::arg("points"));

  m.def(
      "solve_screen",
      [](double k, double length, double theta, int p, int n, double sigma) {
        const Screen screen = make_screen(length);
        const Incidence inc = Incidence::from_angle(k, theta);
        return solve_hna(build_hna_space(screen, k, p, n > 0 ? n : 2 * (p + 1), sigma), Formulation::ScreenSingleLayer,
                         inc);
      },
      py::arg("k"), py::arg("length") = 2.0 * pi, py::arg("theta") = pi / 6, py::arg("p") = 3, py::arg("n") = 0,
      py::arg("sigma") = 0.15, "HNA Galerkin solve on a sound-soft screen; n = 0 means 2(p+1) layers.");

  m.def(
      "solve_polygon",
      [](const std::vector<std::array<double, 2>>& vertices, double k, double theta, int p, int n, double sigma) {
        const ConvexPolygon poly = polygon_from(vertices);
        const Incidence inc = Incidence::from_angle(k, theta);
        return solve_hna(build_hna_space(poly, k, p, n > 0 ? n : 2 * (p + 1), sigma),
                         Formulation::PolygonStarCombined, inc);
      },
      py::arg("vertices"), py::arg("k"), py::arg("theta") = pi / 6, py::arg("p") = 3, py::arg("n") = 0,
      py::arg("sigma") = 0.15, "Star-combined HNA solve on a convex polygon (vertices counterclockwise).");

  m.def(
      "triangle_vertices",
      [](double side) {
        const ConvexPolygon triangle = make_equilateral_triangle(side);
        std::vector<std::array<double, 2>> out;
        for (const Vec2& v : triangle.vertices()) out.push_back({v.x(), v.y()});
        return out;
      },
      py::arg("side"));

  m.def("disk_dtn_eigenvalue", &disk_dtn_eigenvalue, py::arg("k"), py::arg("radius"), py::arg("m"));

  m.def(
      "interior_planewave",
      [](int sides, double radius, double k, int N, double data_angle) {
        const ConvexPolygon poly = make_regular_polygon(sides, radius);
        const Vec2 d(std::cos(data_angle), std::sin(data_angle));
        const InteriorSolution sol = interior_planewave_galerkin(
            poly, k, [&](int, double, const Vec2& x) { return std::exp(I * k * d.dot(x)); },
            equispaced_directions(N));
        const double err = sol.density.l2_distance([&](int side, double, const Vec2& x) {
          return I * k * d.dot(poly.side(side).normal) * std::exp(I * k * d.dot(x));
        });
        py::dict out;
        out["coefficients"] = sol.density.coefficients;
        out["cond"] = sol.gram.cond;
        out["min_eigenvalue"] = sol.gram.min_eigenvalue;
        out["hermitian_defect"] = sol.gram.hermitian_defect;
        out["l2_error"] = err;
        return out;
      },
      py::arg("sides"), py::arg("radius"), py::arg("k"), py::arg("N"), py::arg("data_angle") = 0.0,
      "Plane-wave Galerkin solution of the interior Dirichlet problem on a regular polygon with plane-wave data.");

  m.def(
      "rayleigh_modes",
      [](double k, double period, double theta, int n_min, int n_max) {
        py::list out;
        for (const auto& mode : rayleigh_modes(k, period, theta, n_min, n_max).modes)
          out.append(py::make_tuple(mode.n, mode.alpha, mode.beta));
        return out;
      },
      py::arg("k"), py::arg("period"), py::arg("theta"), py::arg("n_min"), py::arg("n_max"),
      "List of (n, alpha_n, beta_n).");

  m.def("propagating_plus_evanescent", &propagating_plus_evanescent, py::arg("k"), py::arg("period"),
        py::arg("theta"), py::arg("evanescent"));

  m.def(
      "solve_grating",
      [](const std::string& method, double k, double period, double amplitude, double theta,
         const std::vector<int>& modes, bool published_rhs) {
        const GratingProfile profile =
            amplitude == 0.0 ? GratingProfile::flat(period) : GratingProfile::sinusoid(period, amplitude);
        GratingOptions opts;
        opts.rhs = published_rhs ? GratingRhs::Published : GratingRhs::Calibrated;
        const GratingSolution sol = grating_assemble_solve(parse_grating_method(method), profile, k, theta, modes, opts);
        const int reach = static_cast<int>(std::ceil(k * period / pi)) + 1;
        const RayleighCoefficients rc = rayleigh_coefficients(sol.density, -reach, reach);
        py::dict c, eff;
        for (const auto& [n, value] : rc.c) {
          c[py::int_(n)] = value;
          eff[py::int_(n)] = rc.efficiency(n);
        }
        py::dict out;
        out["coefficients"] = sol.density.coefficients;
        out["cond"] = sol.system.cond;
        out["min_eigenvalue"] = sol.system.min_eigenvalue;
        out["n_propagating"] = sol.n_propagating;
        out["rayleigh"] = c;
        out["efficiency"] = eff;
        out["energy"] = energy_balance(rc);
        const GratingDensity density = sol.density;
        out["density"] = py::cpp_function([density](double x1) { return density(x1); }, py::arg("x1"));
        return out;
      },
      py::arg("method"), py::arg("k"), py::arg("period"), py::arg("amplitude"), py::arg("theta"), py::arg("modes"),
      py::arg("published_rhs") = false,
      "Unified-transform grating solve (method SC, SS or SS*) on a flat (amplitude 0) or sinusoidal profile.");

  m.def(
      "run_experiment",
      [](const std::string& config_text, const std::map<std::string, std::string>& overrides) {
        ConfigFile file = ConfigFile::parse_string(config_text);
        for (const auto& [key, value] : overrides) file.set(key, value);
        const ExperimentResult result = run_experiment(resolve_config(file));
        py::dict files;
        for (const auto& f : result.files) files[py::str(f.name)] = f.content;
        py::dict out;
        out["files"] = files;
        out["manifest"] = result.manifest.text();
        out["summary"] = result.summary;
        return out;
      },
      py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{},
      "Run an experiment from key = value config text; returns the CSV contents in memory.");
}
