#include "hnabem/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

namespace hnabem {
namespace {

QuadRule compute_gauss(int q) {
  QuadRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) p0 = 1.0;
      dp = q * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[q - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadRule& gauss_rule(int q) {
  if (q < 1 || q > 64) throw ConfigError("gauss_rule: order must lie in [1, 64], got " + std::to_string(q));
  static std::array<std::unique_ptr<QuadRule>, 65> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  if (!cache[q]) {
    if (q == 1) {
      cache[q] = std::make_unique<QuadRule>(QuadRule{{0.0}, {2.0}});
    } else {
      cache[q] = std::make_unique<QuadRule>(compute_gauss(q));
    }
  }
  return *cache[q];
}

void QuadBudget::validate() const {
  if (!(points_per_wavelength > 0.0)) throw ConfigError("quadrature: points_per_wavelength must be > 0");
  if (singular_layers < 1 || singular_layers > 60)
    throw ConfigError("quadrature: singular_layers must lie in [1, 60]");
  if (!(singular_grading > 0.0 && singular_grading < 1.0))
    throw ConfigError("quadrature: singular_grading must lie in (0, 1)");
  if (gauss_order < 1 || gauss_order > 64) throw ConfigError("quadrature: gauss_order must lie in [1, 64]");
}

void append_oscillatory(double a, double b, double rate, const QuadBudget& budget, QuadPoints& out) {
  const double len = b - a;
  if (len == 0.0) return;
  const QuadRule& rule = gauss_rule(budget.gauss_order);
  int panels = 1;
  if (rate > 0.0) {
    const double points = std::fabs(len) * rate * budget.points_per_wavelength / (2.0 * pi);
    panels = std::max(1, static_cast<int>(std::ceil(points / budget.gauss_order)));
  }
  const double h = len / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int i = 0; i < rule.size(); ++i)
      out.push_back({a, mid + 0.5 * h * rule.nodes[i], 0.5 * std::fabs(h) * rule.weights[i]});
  }
}

void append_graded(double anchor, double length, int layers, double rate, const QuadBudget& budget,
                   QuadPoints& out, bool split_layers) {
  if (length == 0.0) return;
  const double sigma = budget.singular_grading;
  if (layers <= 0) {
    const std::size_t first = out.size();
    append_oscillatory(0.0, length, rate, budget, out);
    for (std::size_t i = first; i < out.size(); ++i) out[i].anchor = anchor;
    return;
  }
  // Layers [sigma^{i+1}, sigma^i] * length for i = 0..layers-1, then one
  // panel on the remaining sliver [0, sigma^layers * length].
  const double ratio = split_layers ? std::sqrt(sigma) : sigma;
  double outer = length;
  for (int i = 0; i < layers; ++i) {
    const double inner = outer * sigma;
    const double mid = outer * ratio;
    const std::size_t first = out.size();
    if (split_layers) append_oscillatory(inner, mid, rate, budget, out);
    append_oscillatory(mid, outer, rate, budget, out);
    for (std::size_t j = first; j < out.size(); ++j) {
      out[j].offset += out[j].anchor;
      out[j].anchor = anchor;
    }
    outer = inner;
  }
  const QuadRule& rule = gauss_rule(budget.gauss_order);
  for (int i = 0; i < rule.size(); ++i)
    out.push_back({anchor, 0.5 * outer * (1.0 + rule.nodes[i]), 0.5 * std::fabs(outer) * rule.weights[i]});
}

int layers_for_distance(double distance, double length, const QuadBudget& budget) {
  length = std::fabs(length);
  if (length == 0.0) return 0;
  if (distance <= 0.0) return budget.singular_layers;
  if (distance >= length) return 0;
  const int n = static_cast<int>(std::ceil(std::log(distance / length) / std::log(budget.singular_grading))) + 1;
  return std::clamp(n, 1, budget.singular_layers);
}

cplx integrate_graded(const std::function<cplx(double)>& f, double a, double b, bool singular_a,
                      bool singular_b, int layers, double sigma, int q) {
  if (!(b > a)) throw ConfigError("integrate_graded: empty interval");
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("integrate_graded: grading must lie in (0, 1)");
  QuadBudget budget;
  budget.singular_grading = sigma;
  budget.gauss_order = q;
  budget.singular_layers = std::max(layers, 1);
  QuadPoints pts;
  const double mid = 0.5 * (a + b);
  // Nodes closer to an endpoint than its rounding resolution would collapse
  // onto it, so grading stops there.
  auto resolvable = [&](double end, double len) {
    const double floor_len = 8.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(end), 1e-300);
    if (floor_len <= 0.0 || std::fabs(end) == 0.0) return layers;
    const int n = static_cast<int>(std::floor(std::log(floor_len / std::fabs(len)) / std::log(sigma)));
    return std::clamp(n, 0, layers);
  };
  if (singular_a && singular_b) {
    append_graded(a, mid - a, resolvable(a, mid - a), 0.0, budget, pts, true);
    append_graded(b, mid - b, resolvable(b, mid - b), 0.0, budget, pts, true);
  } else if (singular_a) {
    append_graded(a, b - a, resolvable(a, b - a), 0.0, budget, pts, true);
  } else if (singular_b) {
    append_graded(b, a - b, resolvable(b, a - b), 0.0, budget, pts, true);
  } else {
    append_oscillatory(a, b, 0.0, budget, pts);
  }
  cplx sum = 0.0;
  for (const auto& p : pts) {
    const cplx v = f(p.position());
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError("integrate_graded: non-finite integrand at x = " + std::to_string(p.position()));
    sum += p.weight * v;
  }
  return sum;
}

}  // namespace hnabem
