#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ximarkov/error.hpp"
#include "ximarkov/linalg.hpp"
#include "ximarkov/quadrature.hpp"
#include "ximarkov/random.hpp"

namespace ximarkov {

namespace radial {
/// R^2 chi-squared with rank(Sigma) degrees of freedom.
struct Normal {};
/// Multivariate Student-t with nu degrees of freedom.
struct StudentT {
  double nu;
};
/// Arbitrary radial law on [0, inf). pdf is optional; without it the density
/// is taken by central differences of cdf.
struct Custom {
  std::function<double(double)> cdf;
  std::function<double(Rng&)> sample;
  std::function<double(double)> pdf;
};
}  // namespace radial

using Radial = std::variant<radial::Normal, radial::StudentT, radial::Custom>;

/// mu + R A^T U with A^T A = Sigma and U uniform on the unit sphere.
struct EllipticalSpec {
  Eigen::VectorXd mu;
  SigmaPartition sigma;
  Radial radial;

  EllipticalSpec(Eigen::VectorXd mu_, SigmaPartition sigma_, Radial radial_)
      : mu(std::move(mu_)), sigma(std::move(sigma_)), radial(std::move(radial_)) {
    require(mu.size() == sigma.full().rows(), ErrorKind::InvalidParameter, "location and scale sizes differ");
    if (const auto* t = std::get_if<radial::StudentT>(&radial))
      require(std::isfinite(t->nu) && t->nu > 0.0, ErrorKind::InvalidParameter, "Student-t needs nu > 0");
    if (const auto* c = std::get_if<radial::Custom>(&radial)) {
      require(c->cdf && c->sample, ErrorKind::InvalidRadial, "custom radial needs a CDF and a sampler");
      require(c->cdf(0.0) == 0.0, ErrorKind::InvalidRadial, "custom radial CDF must vanish at 0");
    }
  }

  int dimension() const { return static_cast<int>(mu.size()); }
};

/// n x (p+q) draws, deterministic given seed.
inline Eigen::MatrixXd sample_elliptical(const EllipticalSpec& spec, int n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidParameter, "sample size must be positive");
  const Eigen::MatrixXd a = full_rank_factor(spec.sigma.full());
  const auto k = a.rows();
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::chi_squared_distribution<double> chi(
      std::holds_alternative<radial::StudentT>(spec.radial) ? std::get<radial::StudentT>(spec.radial).nu : 1.0);
  Eigen::MatrixXd out(n, spec.dimension());
  Eigen::VectorXd z(k);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) z(j) = gauss(rng);
    double scale = 1.0;
    if (const auto* t = std::get_if<radial::StudentT>(&spec.radial)) {
      scale = std::sqrt(t->nu / chi(rng));
    } else if (const auto* c = std::get_if<radial::Custom>(&spec.radial)) {
      const double r = c->sample(rng);
      require(r >= 0.0 && std::isfinite(r), ErrorKind::InvalidRadial, "radial sampler returned a negative value");
      const double norm = z.norm();
      scale = norm > 0.0 ? r / norm : 0.0;
    }
    out.row(i) = (spec.mu + scale * (a.transpose() * z)).transpose();
  }
  return out;
}

/// Law of Y given X = x for a scalar response:
/// Y = mu_x + sqrt(sigma_star) * R_x * U with U = +-1 and R_x >= 0 distributed by radial_cdf.
struct ConditionalLaw {
  double mu_x = 0.0;
  double sigma_star = 0.0;  // conditional scale variance S22 - S21 S11^-1 S12
  double q_x = 0.0;         // (x - mu_X)^T S11^-1 (x - mu_X)
  std::function<double(double)> radial_cdf;

  double scale() const { return std::sqrt(sigma_star); }

  /// P(Y <= y | X = x).
  double cdf(double y) const {
    if (sigma_star <= 0.0) return y >= mu_x ? 1.0 : 0.0;
    const double z = (y - mu_x) / scale();
    return z >= 0.0 ? 0.5 + 0.5 * radial_cdf(z) : 0.5 - 0.5 * radial_cdf(-z);
  }
};

namespace detail {

// z -> s^-p f_R(s) at s = sqrt(z^2 + q), up to a factor constant in z.
inline std::function<double(double)> conditional_radial_kernel(const Radial& r, int p, int k, double q) {
  if (std::holds_alternative<radial::Normal>(r)) {
    // s^{k-1-p} exp(-z^2/2) after dividing out exp(-q/2)
    return [p, k, q](double z) {
      const double s2 = z * z + q;
      return std::exp(0.5 * (k - 1 - p) * std::log(s2) - 0.5 * z * z);
    };
  }
  if (const auto* t = std::get_if<radial::StudentT>(&r)) {
    const double nu = t->nu;
    // s^{k-1-p} (1 + z^2/(nu+q))^{-(nu+k)/2} after dividing out (1 + q/nu)^{-(nu+k)/2}
    return [p, k, q, nu](double z) {
      const double s2 = z * z + q;
      return std::exp(0.5 * (k - 1 - p) * std::log(s2) - 0.5 * (nu + k) * std::log1p(z * z / (nu + q)));
    };
  }
  const auto& c = std::get<radial::Custom>(r);
  std::function<double(double)> pdf = c.pdf;
  if (!pdf) {
    pdf = [cdf = c.cdf](double s) {
      const double h = 1e-4 * std::max(1.0, s);
      const double lo = std::max(0.0, s - h);
      return (cdf(s + h) - cdf(lo)) / (s + h - lo);
    };
  }
  return [p, q, pdf](double z) {
    const double s = std::sqrt(z * z + q);
    return s > 0.0 ? pdf(s) * std::pow(s, -p) : 0.0;
  };
}

}  // namespace detail

/// Conditional law of the scalar response given the first p coordinates equal x.
inline ConditionalLaw conditional_elliptical(const EllipticalSpec& spec, std::span<const double> x) {
  const SigmaPartition& sigma = spec.sigma;
  require(sigma.q() == 1, ErrorKind::InvalidParameter, "conditional law needs a scalar response");
  const int p = sigma.p();
  require(static_cast<int>(x.size()) == p, ErrorKind::InvalidParameter, "conditioning vector has wrong size");
  const Eigen::MatrixXd s11 = sigma.s11();
  const Eigen::LLT<Eigen::MatrixXd> llt(s11);
  require(llt.info() == Eigen::Success && numerical_rank(s11) == p, ErrorKind::InvalidParameter,
          "predictor scale block must be positive definite");

  Eigen::VectorXd centered(p);
  for (int i = 0; i < p; ++i) centered(i) = x[i] - spec.mu(i);
  const Eigen::VectorXd s12 = sigma.s12().col(0);
  const Eigen::VectorXd w = llt.solve(s12);

  ConditionalLaw law;
  law.mu_x = spec.mu(p) + w.dot(centered);
  law.sigma_star = std::max(sigma.s22()(0, 0) - s12.dot(w), 0.0);
  law.q_x = centered.dot(llt.solve(centered));

  const int k = numerical_rank(sigma.full());
  if (law.sigma_star <= kEigenCutoff * sigma.full().diagonal().maxCoeff() || k == p) {
    law.sigma_star = 0.0;
    law.radial_cdf = [](double r) { return r >= 0.0 ? 1.0 : 0.0; };
    return law;
  }

  const auto kernel = detail::conditional_radial_kernel(spec.radial, p, k, law.q_x);
  // a density taken by differences is only good to about 1e-9
  const auto* custom = std::get_if<radial::Custom>(&spec.radial);
  const double tol = custom && !custom->pdf ? 1e-9 : 1e-12;
  const double total = integrate_adaptive(kernel, 0.0, std::numeric_limits<double>::infinity(), tol);
  require(std::isfinite(total) && total > 0.0, ErrorKind::EmptyConditioning,
          "conditioning point lies beyond the radial support");
  law.radial_cdf = [kernel, total, tol](double r) {
    if (r <= 0.0) return 0.0;
    if (std::isinf(r)) return 1.0;
    // far out, the complement over (r, inf) is cheaper and more accurate
    const double inf = std::numeric_limits<double>::infinity();
    const double mass = r > 4.0 ? total - integrate_adaptive(kernel, r, inf, tol) : integrate_adaptive(kernel, 0.0, r, tol);
    return std::clamp(mass / total, 0.0, 1.0);
  };
  return law;
}

/// W = R * S_d with S_d uniform on the unit simplex.
struct L1Spec {
  int d;
  std::function<double(double)> cdf;
  std::function<double(Rng&)> sample;

  L1Spec(int d_, std::function<double(double)> cdf_, std::function<double(Rng&)> sample_)
      : d(d_), cdf(std::move(cdf_)), sample(std::move(sample_)) {
    require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
    require(cdf && sample, ErrorKind::InvalidRadial, "radial law needs a CDF and a sampler");
    require(cdf(0.0) == 0.0, ErrorKind::InvalidRadial, "radial CDF must vanish at 0");
  }

  /// R ~ Gamma(d, 1): the components are then i.i.d. unit exponentials.
  static L1Spec erlang(int d) {
    require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
    return {d, [d](double r) { return r <= 0.0 ? 0.0 : boost::math::gamma_p(static_cast<double>(d), r); },
            [d](Rng& rng) { return std::gamma_distribution<double>(d, 1.0)(rng); }};
  }

  /// R uniform on [center - half_width, center + half_width]: a continuous stand-in for R = center.
  static L1Spec near_constant(int d, double center, double half_width) {
    require(half_width > 0.0 && center - half_width >= 0.0, ErrorKind::InvalidParameter,
            "window must lie in [0, inf)");
    const double lo = center - half_width, hi = center + half_width;
    return {d, [lo, hi](double r) { return std::clamp((r - lo) / (hi - lo), 0.0, 1.0); },
            [lo, hi](Rng& rng) { return std::uniform_real_distribution<double>(lo, hi)(rng); }};
  }
};

/// n x d draws R * E / sum(E) with E i.i.d. unit exponentials.
inline Eigen::MatrixXd sample_l1(const L1Spec& spec, int n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidParameter, "sample size must be positive");
  Rng rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Eigen::MatrixXd out(n, spec.d);
  std::vector<double> e(spec.d);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < spec.d; ++j) sum += (e[j] = expo(rng));
    const double r = spec.sample(rng);
    require(r >= 0.0 && std::isfinite(r), ErrorKind::InvalidRadial, "radial sampler returned a negative value");
    for (int j = 0; j < spec.d; ++j) out(i, j) = r * (e[j] / sum);
  }
  return out;
}

struct GeneratorValues {
  std::vector<double> phi;
  bool nonincreasing = true;
  bool convex = true;
};

/// phi(x) = E[(1 - x/R)_+^{d-1}], evaluated as the integral over w in (0,1) of
/// (1 - F_R(x/w)) (d-1) (1-w)^{d-2}.
inline GeneratorValues williamson_generator(const std::function<double(double)>& radial_cdf, int d,
                                            std::span<const double> x_grid, double tol = 1e-10) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  GeneratorValues out;
  out.phi.reserve(x_grid.size());
  for (double x : x_grid) {
    require(x >= 0.0, ErrorKind::InvalidParameter, "generator arguments must be nonnegative");
    double value;
    if (x == 0.0) {
      value = 1.0 - radial_cdf(0.0);
    } else if (d == 1) {
      value = 1.0 - radial_cdf(x);
    } else {
      value = integrate_adaptive(
          [&](double w) { return (1.0 - radial_cdf(x / w)) * (d - 1) * std::pow(1.0 - w, d - 2); }, 0.0, 1.0);
    }
    out.phi.push_back(value);
  }
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    if (x_grid[i] > x_grid[i - 1] && out.phi[i] > out.phi[i - 1] + tol) out.nonincreasing = false;
  }
  for (std::size_t i = 2; i < x_grid.size(); ++i) {
    const double h1 = x_grid[i - 1] - x_grid[i - 2], h2 = x_grid[i] - x_grid[i - 1];
    if (h1 <= 0.0 || h2 <= 0.0) continue;
    const double s1 = (out.phi[i - 1] - out.phi[i - 2]) / h1, s2 = (out.phi[i] - out.phi[i - 1]) / h2;
    if (s2 < s1 - tol / std::min(h1, h2)) out.convex = false;
  }
  return out;
}

/// Correlation of (X, X + sigma * eps) for independent standard normals.
inline double additive_error_rho(double noise) {
  require(std::isfinite(noise) && noise >= 0.0, ErrorKind::InvalidParameter, "noise scale must be >= 0");
  return 1.0 / std::sqrt(1.0 + noise * noise);
}

/// Standardized bivariate normal of (X, Y) with Y = X + sigma * eps.
inline EllipticalSpec additive_error_spec(double noise) {
  const double rho = additive_error_rho(noise);
  Eigen::Matrix2d s;
  s << 1.0, rho, rho, 1.0;
  return {Eigen::VectorXd::Zero(2), SigmaPartition(s, 1), radial::Normal{}};
}

}  // namespace ximarkov
