#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "ximarkov/quadrature.hpp"

namespace ximarkov::normal {

inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Standard normal quantile; returns -inf/+inf at 0/1.
inline double quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace detail {

// Negative half of the 6-, 12- and 20-point Gauss-Legendre rules.
struct HalfRules {
  NodesWeights rules[3];
  HalfRules() {
    const int orders[3] = {6, 12, 20};
    for (int r = 0; r < 3; ++r) {
      const auto full = gauss_legendre(orders[r]);
      for (int i = 0; i < orders[r] / 2; ++i) {
        rules[r].nodes.push_back(full.nodes[i]);
        rules[r].weights.push_back(full.weights[i]);
      }
    }
  }
};

inline const HalfRules& half_rules() {
  static const HalfRules rules;
  return rules;
}

// Upper orthant P(X > h, Y > k) for a standard bivariate normal with correlation r
// (Genz 2004, Drezner-Wesolowsky with Gauss-Legendre refinements).
inline double upper_orthant(double h, double k, double r) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double abs_r = std::abs(r);
  const auto& rule = half_rules().rules[abs_r < 0.3 ? 0 : (abs_r < 0.75 ? 1 : 2)];
  double hk = h * k;
  double bvn = 0.0;
  if (abs_r < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (sign * rule.nodes[i] + 1.0) * 0.5);
        bvn += rule.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return bvn * asr / (2.0 * two_pi) + cdf(-h) * cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (abs_r < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-0.5 * (bs / as + hk)) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * std::sqrt(two_pi) * cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double xs = std::pow(a * (sign * rule.nodes[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        bvn += a * rule.weights[i] *
               (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
                std::exp(-0.5 * (bs / xs + hk)) * (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) bvn += cdf(k) - cdf(h);
  return bvn;
}

}  // namespace detail

/// P(X <= x, Y <= y) for a standard bivariate normal with correlation rho.
inline double bivariate_cdf(double x, double y, double rho) {
  if (x == -std::numeric_limits<double>::infinity() || y == -std::numeric_limits<double>::infinity())
    return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return cdf(y);
  if (y == std::numeric_limits<double>::infinity()) return cdf(x);
  if (rho >= 1.0) return cdf(std::min(x, y));
  if (rho <= -1.0) return std::max(cdf(x) - cdf(-y), 0.0);
  return std::clamp(detail::upper_orthant(-x, -y, rho), 0.0, 1.0);
}

}  // namespace ximarkov::normal
