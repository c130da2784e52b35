#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ximarkov/copula.hpp"
#include "ximarkov/error.hpp"
#include "ximarkov/linalg.hpp"
#include "ximarkov/quadrature.hpp"
#include "ximarkov/range_profile.hpp"

namespace ximarkov {

/// Clamp shortfall beyond which a result is flagged.
inline constexpr double kClampFlag = 1e-6;

struct XiResult {
  double value = 0.0;      // clamped to [0, 1]
  double raw_value = 0.0;  // a * diagonal_integral - b
  double a = 0.0;
  double b = 0.0;
  double diagonal_integral = 0.0;
  bool clamped = false;  // |value - raw_value| > kClampFlag
};

/// A value in [0,1] possibly clamped from a slightly out-of-range raw value.
struct BoundedValue {
  double value = 0.0;
  double raw_value = 0.0;
  bool clamped = false;
};

inline BoundedValue clamp_unit(double raw, double lo = 0.0) {
  const double v = std::clamp(raw, lo, 1.0);
  return {v, raw, std::abs(v - raw) > kClampFlag};
}

namespace detail {

// Piecewise quadratic interpolant of the lattice diagonal d_i = D(i/m, i/m):
// panels are pairs of cells, the last cell of an odd lattice reuses (m-2, m-1, m).
// Exact whenever the diagonal is a polynomial of degree <= 2 (M and Pi among others).
class DiagonalInterpolant {
 public:
  explicit DiagonalInterpolant(const CopulaGrid& grid) : m_(grid.resolution()), d_(m_ + 1) {
    for (int i = 0; i <= m_; ++i) d_[i] = grid.at(i, i);
  }

  double operator()(double t) const {
    if (m_ == 1) return t * d_[1];
    const double x = std::clamp(t, 0.0, 1.0) * m_;
    const int cell = std::min(static_cast<int>(x), m_ - 1);
    const int s = (m_ % 2 == 1 && cell == m_ - 1) ? m_ - 2 : cell - cell % 2;
    const double r = x - s;  // local coordinate on nodes 0, 1, 2
    return d_[s] * (r - 1) * (r - 2) / 2 - d_[s + 1] * r * (r - 2) + d_[s + 2] * r * (r - 1) / 2;
  }

  /// Exact integral over [lo, hi] (three-point Gauss per lattice cell).
  double integral(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    static const NodesWeights rule = gauss_legendre(3);
    std::vector<double> cuts{lo, hi};
    for (int i = 1; i < m_; ++i) cuts.push_back(static_cast<double>(i) / m_);
    const auto bp = merge_breakpoints(std::move(cuts), lo, hi, 0.0);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
      const double half = 0.5 * (bp[k + 1] - bp[k]), mid = 0.5 * (bp[k + 1] + bp[k]);
      double panel = 0.0;
      for (std::size_t j = 0; j < rule.size(); ++j) panel += rule.weights[j] * (*this)(mid + half * rule.nodes[j]);
      sum += half * panel;
    }
    return sum;
  }

 private:
  int m_;
  std::vector<double> d_;
};

}  // namespace detail

/// xi from the copula of the Markov pair (Y, Y') and the range profile of F_Y,
/// via a * integral of D(g(t), g(t)) dt - b with g the left-continuous profile.
inline XiResult xi_from_product(const CopulaGrid& product, const RangeProfile& profile) {
  const detail::DiagonalInterpolant diag(product);
  // integrals of g(1-g), g^2 and D(g,g) over (0,1)
  const auto moment1 = [](double lo, double hi) { return 0.5 * (hi * hi - lo * lo); };
  const auto moment2 = [](double lo, double hi) { return (hi * hi * hi - lo * lo * lo) / 3.0; };
  double spread = 0.0, square = 0.0, diagonal = 0.0;
  for (const auto& [lo, hi] : profile.continuous_parts()) {
    spread += moment1(lo, hi) - moment2(lo, hi);
    square += moment2(lo, hi);
    diagonal += diag.integral(lo, hi);
  }
  for (const auto& atom : profile.atoms()) {
    const double g = atom.lo;
    spread += atom.mass() * g * (1.0 - g);
    square += atom.mass() * g * g;
    diagonal += atom.mass() * diag(g);
  }
  require(spread > 1e-12, ErrorKind::DegenerateResponse, "response is almost surely constant");

  XiResult out;
  out.diagonal_integral = diagonal;
  if (profile.is_identity()) {
    out.a = 6.0;
    out.b = 2.0;
  } else {
    out.a = 1.0 / spread;
    out.b = out.a * square;
  }
  const auto bounded = clamp_unit(out.a * diagonal - out.b);
  out.raw_value = bounded.raw_value;
  out.value = bounded.value;
  out.clamped = bounded.clamped;
  return out;
}

/// Population xi of a copula with continuous margins, via the quadrature path.
inline XiResult xi_population(const CopulaSpec& c, int m = 256, const QuadratureOptions& opts = {}) {
  return xi_from_product(markov_product(c, m, opts), RangeProfile::identity());
}

/// r2 this close to 1 is treated as exact linear dependence.
inline constexpr double kR2Snap = 1e-13;

/// Closed-form xi for a normal vector with squared multiple correlation r2.
inline double xi_gaussian_r2(double r2) {
  require(std::isfinite(r2) && r2 >= -1e-12 && r2 <= 1.0 + 1e-12, ErrorKind::InvalidParameter,
          "squared correlation must lie in [0, 1]");
  if (r2 <= 0.0) return 0.0;
  // The slope is infinite at r2 = 1, so rounding noise in r2 would cost about 1e-8 in xi.
  if (r2 >= 1.0 - kR2Snap) return 1.0;
  const double arg = std::clamp((1.0 + r2) / 2.0, -1.0, 1.0);
  return std::clamp(3.0 * std::asin(arg) / std::numbers::pi - 0.5, 0.0, 1.0);
}

/// Squared multiple correlation S21 S11^+ S12 / sigma_Y^2 (q = 1).
inline double gaussian_r2(const SigmaPartition& sigma) {
  require(sigma.q() == 1, ErrorKind::InvalidParameter, "closed-form xi needs a scalar response");
  const double var_y = sigma.s22()(0, 0);
  require(var_y > 0.0, ErrorKind::DegenerateResponse, "response variance must be positive");
  const Eigen::MatrixXd s12 = sigma.s12();
  const double explained = (s12.transpose() * pseudoinverse(sigma.s11()) * s12)(0, 0);
  return std::clamp(explained / var_y, 0.0, 1.0);
}

inline double xi_gaussian(const SigmaPartition& sigma) { return xi_gaussian_r2(gaussian_r2(sigma)); }

/// Bivariate normal with correlation rho.
inline double xi_gaussian(double rho) { return xi_gaussian_r2(rho * rho); }

/// r for p predictors and one response, all pairwise correlated by rho.
inline double equicorrelated_r(int p, double rho) {
  require(p >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  const double floor = -1.0 / p;
  require(std::isfinite(rho) && rho >= floor - 1e-12 && rho <= 1.0 + 1e-12, ErrorKind::InvalidParameter,
          "rho outside the positive semi-definite window [-1/p, 1]");
  rho = std::clamp(rho, floor, 1.0);
  const double denom = 1.0 + (p - 1) * rho;
  if (denom <= 0.0) return -1.0;
  return std::clamp(rho * std::sqrt(p / denom), -1.0, 1.0);
}

/// T = 1 - (q - sum with_x) / (q - sum without_x), clamped to [0, 1].
inline BoundedValue t_chain(std::span<const double> xi_with_x, std::span<const double> xi_without_x) {
  require(!xi_with_x.empty() && xi_with_x.size() == xi_without_x.size(), ErrorKind::InvalidParameter,
          "T needs two nonempty lists of equal length");
  // sorted summation keeps the result independent of the coordinate order
  const auto sorted_sum = [](std::span<const double> xs) {
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    double acc = 0.0;
    for (double x : s) acc += x;
    return acc;
  };
  const double q = static_cast<double>(xi_with_x.size());
  const double with = sorted_sum(xi_with_x);
  const double without = sorted_sum(xi_without_x);
  const double denom = q - without;
  require(denom > 1e-12, ErrorKind::PerfectInternalDependence, "responses perfectly determine one another");
  return clamp_unit((with - without) / denom);
}

/// Closed-form T for (X1, X2, Y1, Y2) normal with within-X correlation rho_x,
/// within-Y correlation rho_y and all cross correlations rho_xy.
inline double t_gaussian_4d(double rho_x, double rho_xy, double rho_y) {
  require(std::isfinite(rho_x) && std::isfinite(rho_xy) && std::isfinite(rho_y), ErrorKind::InvalidParameter,
          "correlations must be finite");
  require(std::abs(rho_x) <= 1.0 && std::abs(rho_y) <= 1.0, ErrorKind::InvalidParameter,
          "correlations must lie in [-1, 1]");
  const double bound = (1.0 + rho_x) / 2.0 * (1.0 + rho_y) / 2.0;
  require(rho_xy * rho_xy <= bound + 1e-12, ErrorKind::InvalidParameter, "scale matrix is not positive semi-definite");
  const double s = rho_xy * rho_xy;
  const double inner = 2.0 * (1.0 + rho_x) - 4.0 * s;
  require(1.0 + rho_x >= 1e-10 && inner >= 1e-10, ErrorKind::SingularConfiguration,
          "closed form is 0/0 at this configuration");
  const auto xi_of_arg = [](double arg) {
    return 3.0 * std::asin(std::clamp(arg, -1.0, 1.0)) / std::numbers::pi - 0.5;
  };
  const double with[2] = {xi_of_arg(0.5 + s / (1.0 + rho_x)),
                          xi_of_arg(0.5 + ((1.0 + rho_x) * rho_y * rho_y - 2.0 * (2.0 * rho_y - 1.0) * s) / inner)};
  const double without[2] = {0.0, xi_of_arg((1.0 + rho_y * rho_y) / 2.0)};
  return t_chain(with, without).value;
}

/// Lambda as the Pearson correlation of sampled Markov pairs (Y, Y').
inline BoundedValue lambda_from_pairs(std::span<const double> y, std::span<const double> y_copy) {
  require(y.size() == y_copy.size() && y.size() >= 2, ErrorKind::InvalidParameter, "need at least two pairs");
  const double n = static_cast<double>(y.size());
  double my = 0.0, mc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    my += y[i];
    mc += y_copy[i];
  }
  my /= n;
  mc /= n;
  double syy = 0.0, scc = 0.0, syc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    syy += (y[i] - my) * (y[i] - my);
    scc += (y_copy[i] - mc) * (y_copy[i] - mc);
    syc += (y[i] - my) * (y_copy[i] - mc);
  }
  require(syy > 0.0 && scc > 0.0, ErrorKind::DegenerateResponse, "response has zero variance");
  return clamp_unit(syc / std::sqrt(syy * scc), -1.0);
}

/// Lambda = Var(E[Y|X]) / Var(Y).
inline double lambda_from_moments(double explained_variance, double total_variance) {
  require(total_variance > 0.0, ErrorKind::DegenerateResponse, "response has zero variance");
  require(explained_variance >= 0.0 && explained_variance <= total_variance * (1.0 + 1e-12),
          ErrorKind::InvalidParameter, "explained variance must lie in [0, Var(Y)]");
  return std::min(explained_variance / total_variance, 1.0);
}

enum class Extremal { TZero, TOne, Interior };

inline const char* to_string(Extremal e) {
  switch (e) {
    case Extremal::TZero: return "T_zero";
    case Extremal::TOne: return "T_one";
    case Extremal::Interior: return "interior";
  }
  return "unknown";
}

/// Extremal cases of T for an elliptical vector with scale matrix sigma.
inline Extremal elliptical_extremal_classify(const SigmaPartition& sigma, bool is_normal) {
  const Eigen::MatrixXd& full = sigma.full();
  const double scale = full.diagonal().maxCoeff();
  for (Eigen::Index i = 0; i < full.rows(); ++i)
    require(full(i, i) > kEigenCutoff * scale, ErrorKind::InvalidParameter, "degenerate component");
  const bool null_cross = sigma.s12().cwiseAbs().maxCoeff() <= kEigenCutoff * scale;
  if (null_cross && is_normal) return Extremal::TZero;
  if (numerical_rank(full) == numerical_rank(sigma.s11())) return Extremal::TOne;
  return Extremal::Interior;
}

}  // namespace ximarkov
