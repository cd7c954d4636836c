#include "hnabem/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hnabem/specfun.hpp"

namespace hnabem {

cplx kernel_eval(KernelKind kind, double k, const Vec2& x, const Vec2& y, const Vec2& normal) {
  const Vec2 d = x - y;
  const double r = d.norm();
  if (!(r > 0.0)) throw DomainError("kernel_eval: x and y coincide");
  switch (kind) {
    case KernelKind::Phi:
      return 0.25 * I * specfun::hankel1(0, k * r);
    case KernelKind::DPhiDNuY:
      return 0.25 * I * k * specfun::hankel1(1, k * r) * d.dot(normal) / r;
    case KernelKind::DPhiDNuX:
      return -0.25 * I * k * specfun::hankel1(1, k * r) * d.dot(normal) / r;
  }
  return 0.0;
}

Coupling Coupling::constant(cplx eta) {
  if (eta.real() == 0.0 || !std::isfinite(eta.real()) || !std::isfinite(eta.imag()))
    throw ConfigError("coupling parameter must have nonzero real part");
  return {Rule::Constant, eta};
}

cplx Coupling::at(const Vec2& x, double k) const {
  if (rule == Rule::Star) return cplx(k * x.norm(), 0.5);
  return value;
}

namespace {

// Legendre P_0..P_p at t.
inline void legendre(int p, double t, double* P) {
  P[0] = 1.0;
  if (p >= 1) P[1] = t;
  for (int l = 2; l <= p; ++l) P[l] = ((2.0 * l - 1.0) * t * P[l - 1] - (l - 1.0) * P[l - 2]) / l;
}

inline void legendre_derivative(int p, const double* P, double* dP) {
  dP[0] = 0.0;
  if (p >= 1) dP[1] = 1.0;
  for (int l = 2; l <= p; ++l) dP[l] = dP[l - 2] + (2.0 * l - 1.0) * P[l - 1];
}

constexpr int max_degree = 32;

void check_element(const Element& e, const Boundary& boundary) {
  if (e.side < 0 || e.side >= boundary.size()) throw ConfigError("element refers to a nonexistent side");
  if (!(e.b > e.a)) throw ConfigError("element has empty support");
  if (e.degree < 0 || e.degree > max_degree) throw ConfigError("element degree out of range");
}

}  // namespace

void element_basis_local(const Element& e, double k, double s, double from_a, cplx* out) {
  double P[max_degree + 1];
  const double h = e.b - e.a;
  const double t = (from_a - (h - from_a)) / h;
  legendre(e.degree, t, P);
  const cplx phase = e.phase_rate == 0.0 ? cplx(1.0) : std::exp(I * (k * e.phase_rate * s));
  for (int l = 0; l <= e.degree; ++l) out[l] = std::sqrt((2.0 * l + 1.0) / h) * P[l] * phase;
}

void element_basis(const Element& e, double k, double s, cplx* out) { element_basis_local(e, k, s, s - e.a, out); }

void element_basis_derivative_local(const Element& e, double k, double s, double from_a, cplx* out) {
  double P[max_degree + 1], dP[max_degree + 1];
  const double h = e.b - e.a;
  const double t = (from_a - (h - from_a)) / h;
  legendre(e.degree, t, P);
  legendre_derivative(e.degree, P, dP);
  const cplx ikc = I * (k * e.phase_rate);
  const cplx phase = e.phase_rate == 0.0 ? cplx(1.0) : std::exp(ikc * s);
  for (int l = 0; l <= e.degree; ++l)
    out[l] = std::sqrt((2.0 * l + 1.0) / h) * (dP[l] * (2.0 / h) + ikc * P[l]) * phase;
}

void element_basis_derivative(const Element& e, double k, double s, cplx* out) {
  element_basis_derivative_local(e, k, s, s - e.a, out);
}

TargetPoint TargetPoint::on_boundary(const Boundary& boundary, int side, double s_anchor, double s_offset) {
  const Segment& seg = boundary.sides.at(side);
  TargetPoint t;
  t.anchor = seg.point(s_anchor);
  t.displacement = s_offset * seg.tangent;
  t.side = side;
  t.s_anchor = s_anchor;
  t.s_offset = s_offset;
  return t;
}

double distance_to(const Boundary& boundary, int side, double a, double b, const TargetPoint& target) {
  const Segment& seg = boundary.sides[side];
  if (target.side == side) {
    const double from_a = (target.s_anchor - a) + target.s_offset;
    const double to_b = (b - target.s_anchor) - target.s_offset;
    if (from_a < 0.0) return -from_a;
    if (to_b < 0.0) return -to_b;
    return 0.0;
  }
  const Vec2 x = target.position();
  const double s = std::clamp((x - seg.start).dot(seg.tangent), a, b);
  return (x - seg.point(s)).norm();
}

void inner_rule(const Boundary& boundary, int side, double a, double b, const TargetPoint& target, double rate,
                const QuadBudget& budget, std::vector<InnerNode>& out) {
  const Segment& seg = boundary.sides[side];
  const Vec2& tau = seg.tangent;
  QuadPoints pts;
  if (target.side == side) {
    const double sx = target.s();
    const double from_a = (target.s_anchor - a) + target.s_offset;
    const double to_b = (b - target.s_anchor) - target.s_offset;
    const double len = b - a;
    if (from_a <= 0.0) {
      // target before a: y = a + u, x - y = -(d + u) tau
      const double d = -from_a;
      append_graded(0.0, len, layers_for_distance(d, len, budget), rate, budget, pts, true);
      for (const auto& p : pts) {
        const double r = d + p.offset;
        out.push_back({a + p.offset, p.offset, -r * tau, r, p.weight});
      }
    } else if (to_b <= 0.0) {
      const double d = -to_b;
      append_graded(0.0, len, layers_for_distance(d, len, budget), rate, budget, pts, true);
      for (const auto& p : pts) {
        const double r = d + p.offset;
        out.push_back({b - p.offset, (b - a) - p.offset, r * tau, r, p.weight});
      }
    } else {
      append_graded(0.0, from_a, budget.singular_layers, rate, budget, pts, true);
      for (const auto& p : pts) out.push_back({sx - p.offset, from_a - p.offset, p.offset * tau, p.offset, p.weight});
      pts.clear();
      append_graded(0.0, to_b, budget.singular_layers, rate, budget, pts, true);
      for (const auto& p : pts) out.push_back({sx + p.offset, from_a + p.offset, -p.offset * tau, p.offset, p.weight});
    }
    return;
  }

  // Different side or free point. Nodes are written relative to the trial
  // endpoint E nearest to the split point.
  const Vec2 x = target.position();
  double split = std::clamp((x - seg.start).dot(seg.tangent), a, b);
  const bool base_a = (split - a) <= (b - split);
  const double s_base = base_a ? a : b;
  const Vec2 E = seg.point(s_base);
  const Vec2 x_rel = (target.anchor - E) + target.displacement;
  const double v_split = split - s_base;
  const double dist = (x_rel - v_split * tau).norm();
  auto emit = [&](double length) {
    pts.clear();
    append_graded(0.0, length, layers_for_distance(dist, length, budget), rate, budget, pts, true);
    for (const auto& p : pts) {
      const double v = v_split + p.offset;
      const Vec2 diff = x_rel - v * tau;
      out.push_back({s_base + v, (s_base - a) + v, diff, diff.norm(), p.weight});
    }
  };
  if (split > a) emit(a - split);
  if (split < b) emit(b - split);
}

struct PairingEngine::InnerSums {
  std::vector<cplx> S, DP, D, T;
  std::vector<InnerNode> nodes;
  std::vector<cplx> basis;
};

PairingEngine::PairingEngine(const Boundary& boundary, double k, OperatorKind kind, Coupling eta,
                             QuadBudget budget)
    : boundary_(&boundary), k_(k), kind_(kind), eta_(eta), budget_(budget) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("wavenumber must be > 0");
  budget_.validate();
  if (kind == OperatorKind::StarCombined) eta_ = Coupling::star();
  if (eta_.rule == Coupling::Rule::Constant && eta_.value.real() == 0.0)
    throw ConfigError("coupling parameter must have nonzero real part");
}

void PairingEngine::inner_sums(const Element& trial, const TargetPoint& x, bool need_s, bool need_dp, bool need_d,
                               bool need_t, InnerSums& sums) const {
  const int n = trial.size();
  sums.S.assign(n, 0.0);
  sums.DP.assign(n, 0.0);
  sums.D.assign(n, 0.0);
  sums.T.assign(n, 0.0);
  sums.basis.resize(n);
  sums.nodes.clear();
  const double rate = k_ * (1.0 + std::fabs(trial.phase_rate));
  inner_rule(*boundary_, trial.side, trial.a, trial.b, x, rate, budget_, sums.nodes);
  const Segment& tseg = boundary_->sides[trial.side];
  Vec2 nu_x = Vec2::Zero(), tau_x = Vec2::Zero();
  if (x.side >= 0) {
    nu_x = boundary_->sides[x.side].normal;
    tau_x = boundary_->sides[x.side].tangent;
  }
  for (const auto& nd : sums.nodes) {
    const auto [h0, h1] = specfun::hankel1_01(k_ * nd.r);
    element_basis_local(trial, k_, nd.s, nd.from_a, sums.basis.data());
    const double w = nd.w;
    if (need_s) {
      const cplx kv = 0.25 * I * h0 * w;
      for (int l = 0; l < n; ++l) sums.S[l] += kv * sums.basis[l];
    }
    if (need_dp) {
      const cplx kv = -0.25 * I * k_ * h1 * (nd.diff.dot(nu_x) / nd.r) * w;
      for (int l = 0; l < n; ++l) sums.DP[l] += kv * sums.basis[l];
    }
    if (need_d) {
      const cplx kv = 0.25 * I * k_ * h1 * (nd.diff.dot(tseg.normal) / nd.r) * w;
      for (int l = 0; l < n; ++l) sums.D[l] += kv * sums.basis[l];
    }
    if (need_t) {
      const cplx kv = -0.25 * I * k_ * h1 * (nd.diff.dot(tau_x) / nd.r) * w;
      for (int l = 0; l < n; ++l) sums.T[l] += kv * sums.basis[l];
    }
  }
}

void PairingEngine::single_layer_values(const Element& trial, const TargetPoint& x, cplx* out) const {
  InnerSums sums;
  inner_sums(trial, x, true, false, false, false, sums);
  std::copy(sums.S.begin(), sums.S.end(), out);
}

void PairingEngine::outer_points(const Element& trial, const Element& test, QuadPoints& pts,
                                 std::vector<TargetPoint>& targets) const {
  const Segment& tseg = boundary_->sides[test.side];
  const Segment& rseg = boundary_->sides[trial.side];
  const bool same = trial.side == test.side;

  std::vector<double> cuts{test.a, test.b};
  auto add_cut = [&](double t) {
    if (t > test.a && t < test.b) cuts.push_back(t);
  };
  if (same) {
    add_cut(trial.a);
    add_cut(trial.b);
  } else {
    for (const Vec2& A : {rseg.point(trial.a), rseg.point(trial.b)}) {
      if (A == tseg.start || A == tseg.end) continue;  // shared corner: already a test-side endpoint
      add_cut((A - tseg.start).dot(tseg.tangent));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto distance_at = [&](double u) {
    if (same) {
      if (u >= trial.a && u <= trial.b) return std::min(u - trial.a, trial.b - u);
      return std::min(std::fabs(u - trial.a), std::fabs(u - trial.b));
    }
    const Vec2 x = tseg.point(u);
    const double s = std::clamp((x - rseg.start).dot(rseg.tangent), trial.a, trial.b);
    return (x - rseg.point(s)).norm();
  };

  const double rate = k_ * (std::fabs(test.phase_rate) + std::max(1.0, std::fabs(trial.phase_rate)));
  // After the inner integration the integrand is bounded, with at worst a
  // logarithmic derivative at the cuts, so shallower grading suffices.
  const int max_layers = std::max(4, budget_.singular_layers / 2);
  auto layers = [&](double d, double len) { return std::min(max_layers, layers_for_distance(d, len, budget_)); };
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double u = cuts[c], v = cuts[c + 1];
    const double half = 0.5 * (v - u);
    append_graded(u, half, layers(distance_at(u), half), rate, budget_, pts, true);
    append_graded(v, -half, layers(distance_at(v), half), rate, budget_, pts, true);
  }
  targets.clear();
  targets.reserve(pts.size());
  for (const auto& p : pts) targets.push_back(TargetPoint::on_boundary(*boundary_, test.side, p.anchor, p.offset));
}

Eigen::MatrixXcd PairingEngine::block(const Element& trial, const Element& test) const {
  check_element(trial, *boundary_);
  check_element(test, *boundary_);
  const int nt = trial.size(), ne = test.size();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(ne, nt);
  const bool same = trial.side == test.side;
  const Segment& tseg = boundary_->sides[test.side];

  const bool tangential = kind_ == OperatorKind::TangentialGradSingleLayer || kind_ == OperatorKind::StarCombined;
  const bool by_parts = tangential && tangential_mode_ == TangentialMode::ByParts;
  const bool direct_t = tangential && !by_parts;
  if (direct_t && same) throw DomainError("direct tangential evaluation requires elements on different sides");

  const bool need_s = kind_ != OperatorKind::DoubleLayer && kind_ != OperatorKind::AdjointDoubleLayer;
  const bool need_dp = !same && (kind_ == OperatorKind::AdjointDoubleLayer || kind_ == OperatorKind::StarCombined ||
                                 kind_ == OperatorKind::Combined);
  const bool need_d = !same && kind_ == OperatorKind::DoubleLayer;
  const double x_nu = tseg.start.dot(tseg.normal);
  const double x_tau0 = tseg.start.dot(tseg.tangent);

  QuadPoints pts;
  std::vector<TargetPoint> targets;
  if (need_s || need_dp || need_d || direct_t) outer_points(trial, test, pts, targets);

  InnerSums sums;
  std::vector<cplx> tv(ne), td(ne), op(nt);
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const TargetPoint& x = targets[q];
    const double s = x.s();
    const double w = pts[q].weight;
    inner_sums(trial, x, need_s, need_dp, need_d, direct_t, sums);
    const double test_local = (x.s_anchor - test.a) + x.s_offset;
    element_basis_local(test, k_, s, test_local, tv.data());
    const double x_tau = x_tau0 + s;
    cplx eta = 0.0;
    if (kind_ == OperatorKind::StarCombined || kind_ == OperatorKind::Combined) eta = eta_.at(x.position(), k_);
    for (int l = 0; l < nt; ++l) {
      switch (kind_) {
        case OperatorKind::SingleLayer: op[l] = sums.S[l]; break;
        case OperatorKind::DoubleLayer: op[l] = sums.D[l]; break;
        case OperatorKind::AdjointDoubleLayer: op[l] = sums.DP[l]; break;
        case OperatorKind::TangentialGradSingleLayer: op[l] = direct_t ? x_tau * sums.T[l] : 0.0; break;
        case OperatorKind::StarCombined:
          op[l] = x_nu * sums.DP[l] - I * eta * sums.S[l] + (direct_t ? x_tau * sums.T[l] : 0.0);
          break;
        case OperatorKind::Combined: op[l] = sums.DP[l] - I * eta * sums.S[l]; break;
      }
    }
    for (int m = 0; m < ne; ++m) {
      const cplx cw = w * std::conj(tv[m]);
      for (int l = 0; l < nt; ++l) M(m, l) += cw * op[l];
    }
    if (by_parts) {
      element_basis_derivative_local(test, k_, s, test_local, td.data());
      for (int m = 0; m < ne; ++m) {
        const cplx g = w * std::conj(tv[m] + x_tau * td[m]);
        for (int l = 0; l < nt; ++l) M(m, l) -= g * sums.S[l];
      }
    }
  }

  if (by_parts) {
    // [ (x.tau) S trial conj(test) ] evaluated between the test element ends
    for (int end = 0; end < 2; ++end) {
      const double s = end == 0 ? test.a : test.b;
      const double sign = end == 0 ? -1.0 : 1.0;
      const TargetPoint x = TargetPoint::on_boundary(*boundary_, test.side, s);
      inner_sums(trial, x, true, false, false, false, sums);
      element_basis_local(test, k_, s, end == 0 ? 0.0 : test.b - test.a, tv.data());
      const double x_tau = x_tau0 + s;
      for (int m = 0; m < ne; ++m)
        for (int l = 0; l < nt; ++l) M(m, l) += sign * x_tau * std::conj(tv[m]) * sums.S[l];
    }
  }

  // Identity part of the combined operators: only where the supports overlap.
  double identity = 0.0;
  if (kind_ == OperatorKind::Combined) identity = 0.5;
  if (kind_ == OperatorKind::StarCombined) identity = 0.5 * x_nu;
  if (identity != 0.0 && same) {
    const double lo = std::max(trial.a, test.a), hi = std::min(trial.b, test.b);
    if (hi > lo) {
      QuadBudget exact = budget_;
      exact.gauss_order = std::max(budget_.gauss_order, (trial.degree + test.degree) / 2 + 2);
      QuadPoints ip;
      append_oscillatory(lo, hi, k_ * std::fabs(trial.phase_rate - test.phase_rate), exact, ip);
      std::vector<cplx> bv(nt);
      for (const auto& p : ip) {
        const double s = p.position();
        element_basis_local(trial, k_, s, (p.anchor - trial.a) + p.offset, bv.data());
        element_basis_local(test, k_, s, (p.anchor - test.a) + p.offset, tv.data());
        for (int m = 0; m < ne; ++m)
          for (int l = 0; l < nt; ++l) M(m, l) += identity * p.weight * bv[l] * std::conj(tv[m]);
      }
    }
  }

  if (!M.allFinite()) {
    std::ostringstream msg;
    msg << "quadrature failure for trial element (side " << trial.side << ", [" << trial.a << ", " << trial.b
        << "]) against test element (side " << test.side << ", [" << test.a << ", " << test.b << "])";
    throw NumericalError(msg.str());
  }
  return M;
}

cplx weak_pairing(OperatorKind kind, const Boundary& boundary, const BasisFunction& trial,
                  const BasisFunction& test, double k, Coupling eta, const QuadBudget& budget) {
  if (trial.degree < 0 || trial.degree > trial.element.degree || test.degree < 0 ||
      test.degree > test.element.degree)
    throw ConfigError("weak_pairing: basis degree exceeds its element degree");
  PairingEngine engine(boundary, k, kind, eta, budget);
  return engine.block(trial.element, test.element)(test.degree, trial.degree);
}

Eigen::VectorXcd project_onto(const Boundary& boundary, const Element& test, double k,
                              const std::function<cplx(int, double, const Vec2&)>& g, double rate,
                              const QuadBudget& budget) {
  check_element(test, boundary);
  const Segment& seg = boundary.sides[test.side];
  QuadBudget b = budget;
  b.gauss_order = std::max(budget.gauss_order, test.degree + 2);
  QuadPoints pts;
  append_oscillatory(test.a, test.b, k * (std::fabs(rate) + std::fabs(test.phase_rate)), b, pts);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(test.size());
  std::vector<cplx> tv(test.size());
  for (const auto& p : pts) {
    const double s = p.position();
    element_basis_local(test, k, s, (p.anchor - test.a) + p.offset, tv.data());
    const cplx gv = g(test.side, s, seg.point(s));
    for (int m = 0; m < test.size(); ++m) out[m] += p.weight * gv * std::conj(tv[m]);
  }
  return out;
}

cplx layer_potential(const Boundary& boundary, int side, double a, double b, double k, KernelKind kind,
                     const std::function<cplx(double)>& density, double rate, const TargetPoint& x,
                     const QuadBudget& budget) {
  std::vector<InnerNode> nodes;
  inner_rule(boundary, side, a, b, x, k * (1.0 + std::fabs(rate)), budget, nodes);
  const Segment& seg = boundary.sides[side];
  Vec2 nu_x = Vec2::Zero();
  if (x.side >= 0) nu_x = boundary.sides[x.side].normal;
  cplx sum = 0.0;
  for (const auto& nd : nodes) {
    cplx kv;
    switch (kind) {
      case KernelKind::Phi: kv = 0.25 * I * specfun::hankel1(0, k * nd.r); break;
      case KernelKind::DPhiDNuY:
        kv = 0.25 * I * k * specfun::hankel1(1, k * nd.r) * nd.diff.dot(seg.normal) / nd.r;
        break;
      case KernelKind::DPhiDNuX:
        kv = -0.25 * I * k * specfun::hankel1(1, k * nd.r) * nd.diff.dot(nu_x) / nd.r;
        break;
    }
    sum += nd.w * kv * density(nd.s);
  }
  return sum;
}

namespace {

bool inside_convex(const ConvexPolygon& poly, const Vec2& x) {
  for (int j = 0; j < poly.num_sides(); ++j)
    if ((x - poly.side(j).start).dot(poly.side(j).normal) >= 0.0) return false;
  return true;
}

}  // namespace

cplx greens_identity_residual(const ConvexPolygon& poly, double k, const Vec2& z, const Vec2& x,
                              const QuadBudget& budget) {
  if (inside_convex(poly, z)) throw DomainError("greens_identity_residual: source point must be exterior");
  const Boundary& boundary = poly.boundary();
  const double diam = boundary.diameter();
  double dist = std::numeric_limits<double>::infinity();
  for (int j = 0; j < poly.num_sides(); ++j) {
    const TargetPoint t = TargetPoint::free(x);
    dist = std::min(dist, distance_to(boundary, j, 0.0, poly.side(j).length, t));
  }
  if (dist < 1e-6 * diam) throw DomainError("greens_identity_residual: evaluation point too close to the boundary");
  for (int j = 0; j < poly.num_sides(); ++j)
    if (distance_to(boundary, j, 0.0, poly.side(j).length, TargetPoint::free(z)) < 1e-6 * diam)
      throw DomainError("greens_identity_residual: source point too close to the boundary");

  const TargetPoint target = TargetPoint::free(x);
  cplx total = 0.0;
  for (int j = 0; j < poly.num_sides(); ++j) {
    const Segment& seg = poly.side(j);
    auto u = [&](double s) { return kernel_eval(KernelKind::Phi, k, seg.point(s), z); };
    auto du = [&](double s) { return kernel_eval(KernelKind::DPhiDNuX, k, seg.point(s), z, seg.normal); };
    total += layer_potential(boundary, j, 0.0, seg.length, k, KernelKind::Phi, du, 1.0, target, budget);
    total -= layer_potential(boundary, j, 0.0, seg.length, k, KernelKind::DPhiDNuY, u, 1.0, target, budget);
  }
  if (inside_convex(poly, x)) total -= kernel_eval(KernelKind::Phi, k, x, z);
  return total;
}

}  // namespace hnabem
