#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ximarkov/error.hpp"

namespace ximarkov {

/// Composite Gauss-Legendre settings shared by every t-integral over (0,1).
struct QuadratureOptions {
  int panels = 1024;  // uniform panels on [0,1]; kinks and lattice lines are added on top
  int order = 8;      // Gauss-Legendre points per panel
  int end_levels = 50;  // geometric refinement of the first and last panel toward 0 and 1
};

struct NodesWeights {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule of the given order on [-1, 1], nodes ascending.
inline NodesWeights gauss_legendre(int order) {
  require(order >= 1, ErrorKind::InvalidParameter, "Gauss-Legendre order must be positive");
  NodesWeights rule;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 2.0);
  if (order == 1) return rule;
  // P_order and its derivative at x by the three-term recurrence.
  const auto legendre = [order](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::pair{p1, order * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < order / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) {
    const double dp = legendre(0.0).second;
    rule.weights[order / 2] = 2.0 / (dp * dp);
  }
  return rule;
}

/// Sorted, de-duplicated breakpoints inside [lo, hi] (endpoints included).
inline std::vector<double> merge_breakpoints(std::vector<double> points, double lo, double hi,
                                             double tol = 1e-13) {
  points.push_back(lo);
  points.push_back(hi);
  std::erase_if(points, [&](double p) { return !(p >= lo && p <= hi); });
  std::sort(points.begin(), points.end());
  std::vector<double> out;
  out.reserve(points.size());
  for (double p : points) {
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  }
  if (out.back() != hi) out.back() = hi;
  out.front() = lo;
  return out;
}

/// Uniform panel edges k/panels intersected with [lo, hi].
inline std::vector<double> uniform_edges(int panels, double lo, double hi) {
  std::vector<double> edges;
  const int first = static_cast<int>(std::ceil(lo * panels));
  const int last = static_cast<int>(std::floor(hi * panels));
  for (int k = first; k <= last; ++k) edges.push_back(static_cast<double>(k) / panels);
  return edges;
}

/// Uniform edges plus geometric edges 2^-k / panels next to 0 and 1, restricted to [lo, hi].
/// The refinement absorbs endpoint power singularities of sections such as t -> d1 C(t, u).
inline std::vector<double> panel_edges(const QuadratureOptions& opts, double lo, double hi) {
  auto edges = uniform_edges(opts.panels, lo, hi);
  for (int k = 1; k <= opts.end_levels; ++k) {
    const double h = std::ldexp(1.0 / opts.panels, -k);
    for (double e : {h, 1.0 - h})
      if (e > lo && e < hi) edges.push_back(e);
  }
  return edges;
}

/// Composite rule with one Gauss-Legendre block per consecutive breakpoint pair.
inline NodesWeights composite_rule(std::span<const double> breakpoints, const NodesWeights& base) {
  NodesWeights rule;
  if (breakpoints.size() < 2) return rule;
  rule.nodes.reserve((breakpoints.size() - 1) * base.size());
  rule.weights.reserve((breakpoints.size() - 1) * base.size());
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < base.size(); ++k) {
      rule.nodes.push_back(mid + half * base.nodes[k]);
      rule.weights.push_back(half * base.weights[k]);
    }
  }
  return rule;
}

/// Integral over [lo, hi] with uniform panels plus extra breakpoints.
template <class F>
double integrate_composite(F&& f, double lo, double hi, std::vector<double> extra,
                           const QuadratureOptions& opts = {}) {
  if (hi <= lo) return 0.0;
  auto edges = panel_edges(opts, lo, hi);
  edges.insert(edges.end(), extra.begin(), extra.end());
  const auto bp = merge_breakpoints(std::move(edges), lo, hi);
  const auto base = gauss_legendre(opts.order);
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double half = 0.5 * (bp[p + 1] - bp[p]);
    const double mid = 0.5 * (bp[p + 1] + bp[p]);
    double panel = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) panel += base.weights[k] * f(mid + half * base.nodes[k]);
    sum += half * panel;
  }
  return sum;
}

/// Adaptive Gauss-Kronrod (61 points) on a finite or semi-infinite interval.
template <class F>
double integrate_adaptive(F&& f, double lo, double hi, double rel_tol = 1e-12, unsigned max_depth = 20) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  if (std::isinf(lo) || std::isinf(hi)) return gauss_kronrod<double, 61>::integrate(f, lo, hi, max_depth, rel_tol, &err);
  if (hi == lo) return 0.0;
  // mapped to [0, 1]: on very short intervals the raw error estimate never meets rel_tol
  const double width = hi - lo;
  const auto g = [&f, lo, width](double x) { return f(lo + width * x); };
  return width * gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, max_depth, rel_tol, &err);
}

}  // namespace ximarkov
