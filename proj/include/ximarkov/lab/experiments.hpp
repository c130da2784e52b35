#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ximarkov/copula.hpp"
#include "ximarkov/estimators.hpp"
#include "ximarkov/lab/config.hpp"
#include "ximarkov/lab/emit.hpp"
#include "ximarkov/lab/result.hpp"
#include "ximarkov/measures.hpp"
#include "ximarkov/models.hpp"
#include "ximarkov/random.hpp"

namespace ximarkov::lab {

namespace detail {

inline ControlCheck control(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

inline std::string num(double v) { return format_number(v); }

inline std::vector<double> column_of(const Table& t, std::size_t j) {
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(row[j]);
  return out;
}

inline std::vector<double> uniform_draws(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = unif(rng);
  return out;
}

inline void require_sorted_unit(const std::vector<double>& us, const char* what) {
  require(!us.empty(), ErrorKind::InvalidParameter, std::string(what) + " must be nonempty");
  for (double u : us) require(u >= 0.0 && u <= 1.0, ErrorKind::InvalidParameter, std::string(what) + " must lie in [0, 1]");
}

inline int checked_samples(long long n) {
  require(n >= 3 && n <= 100000000, ErrorKind::InvalidParameter, "samples must lie in [3, 1e8]");
  return static_cast<int>(n);
}

}  // namespace detail

// ---------------------------------------------------------------- shuffle

struct ShuffleParams {
  std::vector<int> stripes{1, 2, 4, 8, 16, 32, 64};
  std::vector<double> d1_u{0.25, 0.5, 0.75};
  int lattice = 256;       // sup distance lattice
  int product_grid = 64;   // Markov product grid for the population xi
  int samples = 100000;
  std::uint64_t seed = 1;
  double sup_target = 0.02;  // required at stripe counts >= sup_target_from
  int sup_target_from = 64;
  double d1_floor = 0.2;
  double xi_n_floor = 0.9;

  static ShuffleParams from_config(const ExperimentConfig& c) {
    ShuffleParams p;
    p.stripes = c.param("stripes", p.stripes);
    p.d1_u = c.param("d1_u", p.d1_u);
    p.lattice = c.grid;
    p.product_grid = c.param("product_grid", p.product_grid);
    p.samples = detail::checked_samples(c.samples);
    p.seed = c.seed;
    p.sup_target = c.param("sup_target", p.sup_target);
    p.sup_target_from = c.param("sup_target_from", p.sup_target_from);
    p.d1_floor = c.param("d1_floor", p.d1_floor);
    p.xi_n_floor = c.param("xi_n_floor", p.xi_n_floor);
    p.validate();
    return p;
  }

  void validate() const {
    require(!stripes.empty(), ErrorKind::InvalidParameter, "stripes must be nonempty");
    for (int n : stripes) require(n >= 1, ErrorKind::InvalidParameter, "stripe counts must be >= 1");
    detail::require_sorted_unit(d1_u, "d1_u");
    require(lattice >= 2 && product_grid >= 2, ErrorKind::InvalidParameter, "grids must be >= 2");
  }
};

/// Copulas of (X, nX mod 1): converge to Pi pointwise while xi stays 1.
inline ExperimentResult run_shuffle_counterexample(const ShuffleParams& p) {
  p.validate();
  ExperimentResult r;
  Table t{"shuffle", {"stripes", "sup_distance", "d1_distance", "xi_population", "xi_n"}, {}};
  const auto pi = CopulaSpec::independence();
  for (std::size_t k = 0; k < p.stripes.size(); ++k) {
    const int n = p.stripes[k];
    const auto c = CopulaSpec::shuffle_mod(n);
    const auto x = detail::uniform_draws(p.samples, derive_seed(p.seed, k));
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = n * x[i] - std::floor(n * x[i]);
    t.add({static_cast<double>(n), sup_distance(c, pi, p.lattice), d1_distance(c, pi, p.d1_u),
           xi_population(c, p.product_grid).value, xi_n(x, y, derive_seed(p.seed, 1000 + k))});
  }

  bool xi_one = true, d1_ok = true, sup_ok = true, xin_ok = true, sup_checked = false;
  double worst_xi = 0.0, min_d1 = 1.0;
  for (const auto& row : t.rows) {
    worst_xi = std::max(worst_xi, std::abs(row[3] - 1.0));
    min_d1 = std::min(min_d1, row[2]);
    xi_one = xi_one && std::abs(row[3] - 1.0) <= 1e-9;
    d1_ok = d1_ok && row[2] > p.d1_floor;
    xin_ok = xin_ok && row[4] > p.xi_n_floor;
    if (row[0] >= p.sup_target_from) {
      sup_checked = true;
      sup_ok = sup_ok && row[1] < p.sup_target;
    }
  }
  r.controls.push_back(detail::control("population xi equals 1 at every stripe count", xi_one,
                                       "max |xi - 1| = " + detail::num(worst_xi)));
  r.controls.push_back(detail::control("d1 distance to Pi stays above floor", d1_ok,
                                       "min d1 = " + detail::num(min_d1) + ", floor " + detail::num(p.d1_floor)));
  r.controls.push_back(detail::control("sample xi_n stays above floor", xin_ok, "floor " + detail::num(p.xi_n_floor)));
  if (sup_checked)
    r.controls.push_back(detail::control("sup distance to Pi below target for many stripes", sup_ok,
                                         "target " + detail::num(p.sup_target)));

  Plot plot{"shuffle", "Shuffle copulas against independence", "stripes n", "value", {}};
  const auto xs = detail::column_of(t, 0);
  plot.series.push_back({"sup distance", LineStyle::Solid, xs, detail::column_of(t, 1)});
  plot.series.push_back({"d1 distance", LineStyle::Solid, xs, detail::column_of(t, 2)});
  plot.series.push_back({"xi population", LineStyle::Solid, xs, detail::column_of(t, 3)});
  plot.series.push_back({"xi_n", LineStyle::Dotted, xs, detail::column_of(t, 4)});
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
  return r;
}

// ---------------------------------------------------------- additive error

struct AdditiveErrorParams {
  std::vector<double> sigmas;
  std::vector<double> perturbations{1e-1, 1e-2, 1e-3};
  double robust_sigma = 1.0;
  int samples = 100000;
  int perturbation_samples = 10000;
  std::uint64_t seed = 1;
  double robust_tol = 0.02;         // required for perturbation scales <= robust_scale
  double robust_scale = 1e-3;

  AdditiveErrorParams() {
    for (int i = 0; i <= 30; ++i) sigmas.push_back(0.1 * i);
  }

  static AdditiveErrorParams from_config(const ExperimentConfig& c) {
    AdditiveErrorParams p;
    p.sigmas = c.param("sigmas", p.sigmas);
    p.perturbations = c.param("perturbations", p.perturbations);
    p.robust_sigma = c.param("robust_sigma", p.robust_sigma);
    p.samples = detail::checked_samples(c.samples);
    p.perturbation_samples = detail::checked_samples(c.param("perturbation_samples", 10000LL));
    p.seed = c.seed;
    p.robust_tol = c.param("robust_tol", p.robust_tol);
    p.robust_scale = c.param("robust_scale", p.robust_scale);
    p.validate();
    return p;
  }

  void validate() const {
    require(!sigmas.empty(), ErrorKind::InvalidParameter, "sigmas must be nonempty");
    for (double s : sigmas) require(std::isfinite(s) && s >= 0.0, ErrorKind::InvalidParameter, "sigmas must be >= 0");
    for (double e : perturbations)
      require(std::isfinite(e) && e > 0.0, ErrorKind::InvalidParameter, "perturbation scales must be > 0");
    require(robust_sigma >= 0.0, ErrorKind::InvalidParameter, "robust_sigma must be >= 0");
  }
};

/// Lipschitz constant of sigma -> xi(sigma) in the additive normal error model.
inline constexpr double kAdditiveModulus = 3.0 / std::numbers::pi;

inline ExperimentResult run_additive_error(const AdditiveErrorParams& p) {
  p.validate();
  ExperimentResult r;
  Table t{"additive_error", {"sigma", "rho", "xi_closed", "xi_n", "lambda_closed", "lambda_n", "lambda_n_clamped"}, {}};
  for (std::size_t k = 0; k < p.sigmas.size(); ++k) {
    const double s = p.sigmas[k];
    const double rho = additive_error_rho(s);
    const auto data = sample_elliptical(additive_error_spec(s), p.samples, derive_seed(p.seed, k));
    const auto x = ximarkov::detail::column(data, 0), y = ximarkov::detail::column(data, 1);
    const auto lam = lambda_n(data.leftCols(1), y);
    t.add({s, rho, xi_gaussian(rho), xi_n(x, y, derive_seed(p.seed, 5000 + k)), rho * rho, lam.value,
           lam.clamped ? 1.0 : 0.0});
  }

  double worst_excess = 0.0;
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const double jump = std::abs(t.rows[k][2] - t.rows[k - 1][2]);
    const double allowed = kAdditiveModulus * std::abs(t.rows[k][0] - t.rows[k - 1][0]) * (1.0 + 1e-9) + 1e-15;
    worst_excess = std::max(worst_excess, jump - allowed);
  }
  r.controls.push_back(detail::control("closed-form xi is 3/pi-Lipschitz along the sigma grid", worst_excess <= 0.0,
                                       "max excess " + detail::num(worst_excess)));
  for (const auto& row : t.rows) {
    if (row[0] == 0.0)
      r.controls.push_back(detail::control("xi equals 1 without noise", row[2] == 1.0, "xi = " + detail::num(row[2])));
  }

  Table rob{"additive_error_robustness", {"epsilon", "xi_n", "xi_n_perturbed", "abs_change"}, {}};
  const auto base = sample_elliptical(additive_error_spec(p.robust_sigma), p.perturbation_samples,
                                      derive_seed(p.seed, 9000));
  const auto bx = ximarkov::detail::column(base, 0), by = ximarkov::detail::column(base, 1);
  const std::uint64_t tie_seed = derive_seed(p.seed, 9001);
  const double xi_base = xi_n(bx, by, tie_seed);
  bool robust_ok = true;
  for (std::size_t k = 0; k < p.perturbations.size(); ++k) {
    const double eps = p.perturbations[k];
    Rng rng(derive_seed(p.seed, 9100 + k));
    std::normal_distribution<double> noise;
    std::vector<double> yp(by.size());
    for (std::size_t i = 0; i < by.size(); ++i) yp[i] = by[i] + eps * noise(rng);
    const double xi_p = xi_n(bx, yp, tie_seed);
    const double change = std::abs(xi_p - xi_base);
    rob.add({eps, xi_base, xi_p, change});
    if (eps <= p.robust_scale) robust_ok = robust_ok && change < p.robust_tol;
  }
  r.controls.push_back(detail::control("xi_n robust to small independent perturbations", robust_ok,
                                       "tolerance " + detail::num(p.robust_tol) + " at scales <= " +
                                           detail::num(p.robust_scale)));

  Plot plot{"additive_error", "Additive error model Y = X + sigma eps", "sigma", "value", {}};
  const auto xs = detail::column_of(t, 0);
  plot.series.push_back({"xi closed form", LineStyle::Solid, xs, detail::column_of(t, 2)});
  plot.series.push_back({"xi_n", LineStyle::Dotted, xs, detail::column_of(t, 3)});
  plot.series.push_back({"Lambda closed form", LineStyle::Solid, xs, detail::column_of(t, 4)});
  plot.series.push_back({"lambda_n", LineStyle::Dotted, xs, detail::column_of(t, 5)});
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(rob));
  r.plots.push_back(std::move(plot));
  return r;
}

// --------------------------------------------------------- equicorrelated

/// Points of the rho window [-1/p, 1]. "xi-uniform" spaces the points evenly in
/// the signed value s = sign(rho) xi in [-1, 1], which places rho = -1/p, 0, 1 on
/// the grid and keeps successive xi steps at 2/(n-1); "rho-uniform" spaces rho evenly.
inline std::vector<double> equicorrelated_rho_grid(int p, int n, const std::string& mode) {
  require(p >= 1 && n >= 3, ErrorKind::InvalidParameter, "grid needs p >= 1 and at least 3 points");
  std::vector<double> rho(n);
  if (mode == "rho-uniform") {
    const double lo = -1.0 / p;
    for (int k = 0; k < n; ++k) rho[k] = k == n - 1 ? 1.0 : lo + (1.0 - lo) * k / (n - 1);
    return rho;
  }
  require(mode == "xi-uniform", ErrorKind::InvalidParameter, "grid mode must be xi-uniform or rho-uniform");
  for (int k = 0; k < n; ++k) {
    const double s = -1.0 + 2.0 * k / (n - 1);
    if (2 * k == n - 1) {
      rho[k] = 0.0;
      continue;
    }
    // invert xi = (3/pi) asin((1 + r^2)/2) - 1/2, then r^2 (1 + (p-1) rho) = p rho^2
    const double r2 = std::clamp(2.0 * std::sin((std::abs(s) + 0.5) * std::numbers::pi / 3.0) - 1.0, 0.0, 1.0);
    const double b = (p - 1) * r2, root = std::sqrt(b * b + 4.0 * p * r2);
    rho[k] = s > 0 ? (b + root) / (2.0 * p) : (b - root) / (2.0 * p);
  }
  return rho;
}

struct EquicorrelatedParams {
  std::vector<int> dims{1, 2, 4, 10, 100};
  int resolution = 201;
  std::string grid_mode = "xi-uniform";
  std::vector<double> rho_values;  // optional explicit grid shared by all p
  double jump_tol = 0.05;

  static EquicorrelatedParams from_config(const ExperimentConfig& c) {
    EquicorrelatedParams p;
    p.dims = c.param("dims", p.dims);
    p.resolution = c.param("resolution", p.resolution);
    p.grid_mode = c.param("grid_mode", p.grid_mode);
    p.rho_values = c.param("rho_values", p.rho_values);
    p.jump_tol = c.param("jump_tol", p.jump_tol);
    p.validate();
    return p;
  }

  void validate() const {
    require(!dims.empty(), ErrorKind::InvalidParameter, "dims must be nonempty");
    for (int d : dims) require(d >= 1, ErrorKind::InvalidParameter, "dimensions must be >= 1");
    require(resolution >= 3, ErrorKind::InvalidParameter, "resolution must be >= 3");
    require(grid_mode == "xi-uniform" || grid_mode == "rho-uniform", ErrorKind::InvalidParameter,
            "grid_mode must be xi-uniform or rho-uniform");
  }
};

inline double xi_equicorrelated(int p, double rho) {
  return xi_gaussian(SigmaPartition::equicorrelated(p, 1, rho));
}

inline ExperimentResult run_equicorrelated(const EquicorrelatedParams& prm) {
  prm.validate();
  ExperimentResult r;
  Table t{"equicorrelated", {"p", "rho", "r", "xi"}, {}};
  Plot plot{"equicorrelated", "xi for equicorrelated normal vectors", "rho", "xi", {}};
  for (int p : prm.dims) {
    auto grid = prm.rho_values.empty() ? equicorrelated_rho_grid(p, prm.resolution, prm.grid_mode) : prm.rho_values;
    Series s{"p = " + std::to_string(p), LineStyle::Solid, {}, {}};
    double max_jump = 0.0, previous = std::nan("");
    for (double rho : grid) {
      if (!(rho >= -1.0 / p - 1e-12 && rho <= 1.0)) {
        r.warnings.push_back("p = " + std::to_string(p) + ": rho = " + detail::num(rho) + " outside [-1/p, 1], skipped");
        continue;
      }
      const double xi = xi_equicorrelated(p, rho);
      t.add({static_cast<double>(p), rho, equicorrelated_r(p, rho), xi});
      s.x.push_back(rho);
      s.y.push_back(xi);
      if (!std::isnan(previous)) max_jump = std::max(max_jump, std::abs(xi - previous));
      previous = xi;
    }
    plot.series.push_back(std::move(s));
    const double at0 = xi_equicorrelated(p, 0.0), at1 = xi_equicorrelated(p, 1.0), at_lo = xi_equicorrelated(p, -1.0 / p);
    const std::string tag = "p = " + std::to_string(p) + ": ";
    r.controls.push_back(detail::control(tag + "xi(0) = 0", std::abs(at0) <= 1e-10, "xi(0) = " + detail::num(at0)));
    r.controls.push_back(detail::control(tag + "xi(1) = 1 and xi(-1/p) = 1",
                                         std::abs(at1 - 1.0) <= 1e-10 && std::abs(at_lo - 1.0) <= 1e-10,
                                         "xi(1) = " + detail::num(at1) + ", xi(-1/p) = " + detail::num(at_lo)));
    r.controls.push_back(detail::control(tag + "successive jumps below tolerance", max_jump < prm.jump_tol,
                                         "max jump " + detail::num(max_jump)));
  }
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
  return r;
}

// -------------------------------------------------------------------- t4d

struct T4dParams {
  double rho_x = 0.5;
  std::vector<double> rho_y{-0.999, -0.99, -0.9, -0.75, -0.5, 0.0, 0.5, 0.9};
  int resolution = 201;
  int mc_points = 11;  // per rho_y curve, evenly spaced over the grid (center included)
  int samples = 100000;
  int student_samples = 100000;
  double student_nu = 3.0;
  std::uint64_t seed = 1;
  double mc_tol = 0.03;
  double student_zero_floor = 0.005;  // margin of the Student-t mean over the normal mean at rho_XY = 0

  static T4dParams from_config(const ExperimentConfig& c) {
    T4dParams p;
    p.rho_x = c.param("rho_x", p.rho_x);
    p.rho_y = c.param("rho_y", p.rho_y);
    p.resolution = c.param("resolution", p.resolution);
    p.mc_points = c.param("mc_points", p.mc_points);
    p.samples = detail::checked_samples(c.samples);
    p.student_samples = detail::checked_samples(c.param("student_samples", c.samples));
    p.student_nu = c.param("student_nu", p.student_nu);
    p.seed = c.seed;
    p.mc_tol = c.param("mc_tol", p.mc_tol);
    p.student_zero_floor = c.param("student_zero_floor", p.student_zero_floor);
    p.validate();
    return p;
  }

  void validate() const {
    require(rho_x > -1.0 && rho_x <= 1.0, ErrorKind::InvalidParameter, "rho_x must lie in (-1, 1]");
    require(!rho_y.empty(), ErrorKind::InvalidParameter, "rho_y must be nonempty");
    require(resolution >= 3 && resolution % 2 == 1, ErrorKind::InvalidParameter, "resolution must be odd and >= 3");
    require(mc_points >= 0 && mc_points <= resolution, ErrorKind::InvalidParameter, "mc_points out of range");
    require(student_nu > 0.0, ErrorKind::InvalidParameter, "student_nu must be > 0");
  }
};

/// 4 x 4 scale matrix of (X1, X2, Y1, Y2).
inline Eigen::MatrixXd sigma_4d(double rho_x, double rho_xy, double rho_y) {
  Eigen::MatrixXd s(4, 4);
  s << 1, rho_x, rho_xy, rho_xy, rho_x, 1, rho_xy, rho_xy, rho_xy, rho_xy, 1, rho_y, rho_xy, rho_xy, rho_y, 1;
  return s;
}

inline double rho_xy_bound(double rho_x, double rho_y) {
  return std::sqrt(std::max((1.0 + rho_x) / 2.0 * (1.0 + rho_y) / 2.0, 0.0));
}

/// t_n on a sample of the 4-d model; nu = 0 means normal.
inline double t_n_4d(double rho_x, double rho_xy, double rho_y, double nu, int n, std::uint64_t seed) {
  Radial radial = radial::Normal{};
  if (nu > 0.0) radial = radial::StudentT{nu};
  const EllipticalSpec spec(Eigen::VectorXd::Zero(4), SigmaPartition(sigma_4d(rho_x, rho_xy, rho_y), 2), radial);
  const auto data = sample_elliptical(spec, n, seed);
  return t_n(data.leftCols(2), data.rightCols(2)).value;
}

inline ExperimentResult run_4d_t(const T4dParams& p) {
  p.validate();
  ExperimentResult r;
  Table closed{"t4d_closed", {"rho_y", "rho_xy", "t_closed"}, {}};
  Table normal{"t4d_mc_normal", {"rho_y", "rho_xy", "t_closed", "t_n", "abs_diff"}, {}};
  Table student{"t4d_mc_student", {"nu", "rho_y", "rho_xy", "t_n"}, {}};
  Plot plot{"t4d", "T for 4-d normal (solid) and Student-t (dotted), rho_X = " + detail::num(p.rho_x), "rho_XY", "T", {}};

  const int half = p.resolution / 2;
  std::vector<int> mc_index;
  for (int k = 0; k < p.mc_points; ++k)
    mc_index.push_back(p.mc_points == 1 ? half : static_cast<int>(std::lround(k * (p.resolution - 1.0) / (p.mc_points - 1))));
  if (p.mc_points > 0 && std::find(mc_index.begin(), mc_index.end(), half) == mc_index.end()) mc_index.push_back(half);
  std::sort(mc_index.begin(), mc_index.end());
  mc_index.erase(std::unique(mc_index.begin(), mc_index.end()), mc_index.end());

  bool zero_ok = true, mc_ok = true;
  double worst_zero = 0.0, worst_mc = 0.0, student_zero_sum = 0.0, normal_zero_sum = 0.0;
  int student_zero_count = 0;
  for (std::size_t a = 0; a < p.rho_y.size(); ++a) {
    const double ry = p.rho_y[a];
    if (!(ry >= -1.0 && ry <= 1.0)) {
      r.warnings.push_back("rho_y = " + detail::num(ry) + " outside [-1, 1], skipped");
      continue;
    }
    const double bound = rho_xy_bound(p.rho_x, ry);
    Series sn{"normal rho_Y = " + detail::num(ry), LineStyle::Solid, {}, {}};
    Series st{"t" + detail::num(p.student_nu) + " rho_Y = " + detail::num(ry), LineStyle::Dotted, {}, {}};
    for (int k = 0; k < p.resolution; ++k) {
      const double rxy = k == half ? 0.0 : bound * (k - half) / half;
      double tc;
      try {
        tc = t_gaussian_4d(p.rho_x, rxy, ry);
      } catch (const Error& e) {
        r.warnings.push_back("rho_y = " + detail::num(ry) + ", rho_xy = " + detail::num(rxy) + ": " + e.what());
        continue;
      }
      closed.add({ry, rxy, tc});
      sn.x.push_back(rxy);
      sn.y.push_back(tc);
      if (k == half) {
        worst_zero = std::max(worst_zero, std::abs(tc));
        zero_ok = zero_ok && std::abs(tc) <= 1e-10;
      }
      if (!std::binary_search(mc_index.begin(), mc_index.end(), k)) continue;
      const std::uint64_t task = a * 100000 + k;
      const double tn = t_n_4d(p.rho_x, rxy, ry, 0.0, p.samples, derive_seed(p.seed, 2 * task));
      normal.add({ry, rxy, tc, tn, std::abs(tn - tc)});
      if (k == half) normal_zero_sum += tn;
      worst_mc = std::max(worst_mc, std::abs(tn - tc));
      mc_ok = mc_ok && std::abs(tn - tc) <= p.mc_tol;
      const double ts = t_n_4d(p.rho_x, rxy, ry, p.student_nu, p.student_samples, derive_seed(p.seed, 2 * task + 1));
      student.add({p.student_nu, ry, rxy, ts});
      st.x.push_back(rxy);
      st.y.push_back(ts);
      if (k == half) {
        student_zero_sum += ts;
        ++student_zero_count;
      }
    }
    plot.series.push_back(std::move(sn));
    if (!st.x.empty()) plot.series.push_back(std::move(st));
  }
  r.controls.push_back(detail::control("normal T vanishes at rho_XY = 0 for every rho_Y", zero_ok,
                                       "max |T| = " + detail::num(worst_zero)));
  if (!normal.rows.empty())
    r.controls.push_back(detail::control("normal closed form agrees with t_n", mc_ok,
                                         "max |diff| = " + detail::num(worst_mc) + ", tolerance " + detail::num(p.mc_tol)));
  if (student_zero_count > 0) {
    const double mean = student_zero_sum / student_zero_count, base = normal_zero_sum / student_zero_count;
    r.controls.push_back(detail::control("Student-t t_n at rho_XY = 0 exceeds the normal one (means over rho_Y)",
                                         mean - base > p.student_zero_floor,
                                         "Student-t " + detail::num(mean) + ", normal " + detail::num(base) + ", margin " +
                                             detail::num(p.student_zero_floor)));
  }
  r.tables.push_back(std::move(closed));
  r.tables.push_back(std::move(normal));
  r.tables.push_back(std::move(student));
  r.plots.push_back(std::move(plot));
  return r;
}

// ------------------------------------------------------------------ dirac

struct DiracParams {
  std::vector<double> variances{1.0, 0.5, 0.1, 0.01, 0.001};
  int grid = 64;

  static DiracParams from_config(const ExperimentConfig& c) {
    DiracParams p;
    p.variances = c.param("variances", p.variances);
    p.grid = c.grid;
    p.validate();
    return p;
  }

  void validate() const {
    require(!variances.empty(), ErrorKind::InvalidParameter, "variances must be nonempty");
    for (double v : variances) require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidParameter, "variances must be > 0");
    require(grid >= 2 && grid % 2 == 0, ErrorKind::InvalidParameter, "grid must be even so that 1/2 is a lattice point");
  }
};

/// (X_n, Y_n) = (q_n(U), U) with q_n the N(0, v_n) quantile: F_{X_n} is continuous for
/// every n, so the Markov pair copula is M and xi = 1, while the Dirac limit gives Pi.
inline ExperimentResult run_dirac_limit(const DiracParams& p) {
  p.validate();
  ExperimentResult r;
  const auto m = CopulaSpec::comonotone();
  const auto limit_product = generalized_markov_product(m, RangeProfile::dirac(), p.grid);
  const auto limit_spec = CopulaSpec::grid(limit_product);
  Table t{"dirac", {"variance", "xi_population", "product_sup_to_M", "product_sup_to_limit", "range_deviation"}, {}};
  for (double v : p.variances) {
    (void)v;  // the profile of X_n is continuous whatever the variance
    const auto profile = RangeProfile::identity();
    const auto product = generalized_markov_product(m, profile, p.grid);
    const auto spec = CopulaSpec::grid(product);
    t.add({v, xi_from_product(product, RangeProfile::identity()).value, sup_distance(spec, m, p.grid),
           sup_distance(spec, limit_spec, p.grid), range_l1_distance(profile, RangeProfile::dirac())});
  }
  Table lim{"dirac_limit", {"xi_limit", "product_sup_to_Pi"}, {}};
  lim.add({xi_from_product(limit_product, RangeProfile::identity()).value,
           sup_distance(limit_spec, CopulaSpec::independence(), p.grid)});

  bool xi_ok = true, product_ok = true, gap_ok = true, range_ok = true;
  for (const auto& row : t.rows) {
    xi_ok = xi_ok && std::abs(row[1] - 1.0) <= 1e-9;
    product_ok = product_ok && row[2] <= 1e-9;
    gap_ok = gap_ok && std::abs(row[3] - 0.25) <= 1e-9;
    range_ok = range_ok && std::abs(row[4] - 0.5) <= 1e-12;
  }
  r.controls.push_back(detail::control("xi equals 1 at every step", xi_ok, ""));
  r.controls.push_back(detail::control("Markov pair copula equals M at every step", product_ok, ""));
  r.controls.push_back(detail::control("Dirac limit product equals Pi", lim.rows[0][1] <= 1e-12,
                                       "sup = " + detail::num(lim.rows[0][1])));
  r.controls.push_back(detail::control("sup gap to the limit product stays 0.25", gap_ok, ""));
  r.controls.push_back(detail::control("range deviation stays 0.5", range_ok, ""));

  Plot plot{"dirac", "Range convergence failure", "variance", "value", {}};
  const auto xs = detail::column_of(t, 0);
  plot.series.push_back({"xi", LineStyle::Solid, xs, detail::column_of(t, 1)});
  plot.series.push_back({"sup gap to limit product", LineStyle::Solid, xs, detail::column_of(t, 3)});
  plot.series.push_back({"range deviation", LineStyle::Dotted, xs, detail::column_of(t, 4)});
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(lim));
  r.plots.push_back(std::move(plot));
  return r;
}

// --------------------------------------------------------- si-convergence

/// Family member by name; theta = 0 maps Frank and Clayton to their independence limit.
inline CopulaSpec family_member(const std::string& family, double theta) {
  if (family == "gaussian") return CopulaSpec::gaussian(theta);
  if (family == "frank") return theta == 0.0 ? CopulaSpec::independence() : CopulaSpec::frank(theta);
  if (family == "clayton") return theta == 0.0 ? CopulaSpec::independence() : CopulaSpec::clayton(theta);
  fail(ErrorKind::InvalidParameter, "unknown family '" + family + "' (gaussian, frank, clayton)");
}

struct SiConvergenceParams {
  std::string family = "gaussian";
  double limit = 0.5;
  std::vector<double> sequence;
  std::vector<double> d1_u{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int grid = 256;
  int si_grid = 64;
  double xi_tol = 1e-3;
  double sup_tol = 1e-3;
  double d1_tol = 5e-3;

  SiConvergenceParams() {
    for (int n = 2; n <= 1024; n *= 2) sequence.push_back(0.5 + 1.0 / n);
  }

  static SiConvergenceParams from_config(const ExperimentConfig& c) {
    SiConvergenceParams p;
    p.family = c.param("family", p.family);
    p.limit = c.param("limit", p.limit);
    p.sequence = c.param("sequence", p.sequence);
    p.d1_u = c.param("d1_u", p.d1_u);
    p.grid = c.grid;
    p.si_grid = c.param("si_grid", p.si_grid);
    p.xi_tol = c.param("xi_tol", p.xi_tol);
    p.sup_tol = c.param("sup_tol", p.sup_tol);
    p.d1_tol = c.param("d1_tol", p.d1_tol);
    p.validate();
    return p;
  }

  void validate() const {
    require(!sequence.empty(), ErrorKind::InvalidParameter, "sequence must be nonempty");
    family_member(family, limit);
    for (double th : sequence) family_member(family, th);
    detail::require_sorted_unit(d1_u, "d1_u");
    require(grid >= 2 && si_grid >= 2, ErrorKind::InvalidParameter, "grids must be >= 2");
  }
};

inline ExperimentResult run_si_convergence(const SiConvergenceParams& p) {
  p.validate();
  ExperimentResult r;
  Table t{"si_convergence", {"theta", "sup_distance", "d1_distance", "xi", "xi_gap"}, {}};
  const auto limit = family_member(p.family, p.limit);

  std::vector<double> all = p.sequence;
  all.push_back(p.limit);
  for (double th : all) {
    const auto rep = is_si(family_member(p.family, th), p.si_grid);
    if (!rep.si) {
      r.controls.push_back(detail::control("family is SI along the sequence", false,
                                           p.family + "(" + detail::num(th) + ") violates SI by " +
                                               detail::num(rep.worst_violation) + " at t = " + detail::num(rep.at_t) +
                                               ", u = " + detail::num(rep.at_u)));
      r.tables.push_back(std::move(t));
      return r;
    }
  }
  r.controls.push_back(detail::control("family is SI along the sequence", true, ""));

  const double xi_limit = xi_population(limit, p.grid).value;
  for (double th : p.sequence) {
    const auto c = family_member(p.family, th);
    const double xi = xi_population(c, p.grid).value;
    t.add({th, sup_distance(c, limit, p.grid), d1_distance(c, limit, p.d1_u), xi, std::abs(xi - xi_limit)});
  }
  const auto& last = t.rows.back();
  r.controls.push_back(detail::control("gaps fall below tolerance at the end of the sequence",
                                       last[1] <= p.sup_tol && last[2] <= p.d1_tol && last[4] <= p.xi_tol,
                                       "sup " + detail::num(last[1]) + ", d1 " + detail::num(last[2]) + ", xi gap " +
                                           detail::num(last[4])));

  Plot plot{"si_convergence", "Convergence along an SI family (" + p.family + ")", "step", "gap", {}};
  std::vector<double> steps;
  for (std::size_t k = 0; k < t.rows.size(); ++k) steps.push_back(static_cast<double>(k + 1));
  plot.series.push_back({"sup distance", LineStyle::Solid, steps, detail::column_of(t, 1)});
  plot.series.push_back({"d1 distance", LineStyle::Solid, steps, detail::column_of(t, 2)});
  plot.series.push_back({"xi gap", LineStyle::Dotted, steps, detail::column_of(t, 4)});
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
  return r;
}

// ------------------------------------------------------------ diagnostics

struct DiagnosticsParams {
  std::string family = "gaussian";
  double limit = 0.5;
  std::vector<double> sequence;
  std::vector<int> stripes{1, 2, 4, 8, 16, 32, 64};
  int grid = 256;
  int product_grid = 64;
  double final_tol = 5e-3;
  double joint_floor = 0.1;
  double product_floor = 0.2;

  DiagnosticsParams() {
    for (int n = 1; n <= 256; n *= 2) sequence.push_back(0.5 + 0.4 / n);
  }

  static DiagnosticsParams from_config(const ExperimentConfig& c) {
    DiagnosticsParams p;
    p.family = c.param("family", p.family);
    p.limit = c.param("limit", p.limit);
    p.sequence = c.param("sequence", p.sequence);
    p.stripes = c.param("stripes", p.stripes);
    p.grid = c.grid;
    p.product_grid = c.param("product_grid", p.product_grid);
    p.final_tol = c.param("final_tol", p.final_tol);
    p.joint_floor = c.param("joint_floor", p.joint_floor);
    p.product_floor = c.param("product_floor", p.product_floor);
    p.validate();
    return p;
  }

  void validate() const {
    require(!sequence.empty(), ErrorKind::InvalidParameter, "sequence must be nonempty");
    family_member(family, limit);
    for (double th : sequence) family_member(family, th);
    for (int n : stripes) require(n >= 1, ErrorKind::InvalidParameter, "stripe counts must be >= 1");
    require(grid >= 2 && product_grid >= 2, ErrorKind::InvalidParameter, "grids must be >= 2");
  }
};

/// Witnesses of the two continuity conditions (product convergence and range
/// convergence) along a family sequence, plus the two negative controls.
inline ExperimentResult run_markov_diagnostics(const DiagnosticsParams& p) {
  p.validate();
  ExperimentResult r;
  const auto identity = RangeProfile::identity();
  const auto limit_product = markov_product(family_member(p.family, p.limit), p.grid);
  const auto limit_spec = CopulaSpec::grid(limit_product);
  const double xi_limit = xi_from_product(limit_product, identity).value;

  Table t{"diagnostics", {"theta", "product_sup", "range_deviation", "xi_gap"}, {}};
  for (double th : p.sequence) {
    const auto product = markov_product(family_member(p.family, th), p.grid);
    t.add({th, sup_distance(CopulaSpec::grid(product), limit_spec, p.grid), range_l1_distance(identity, identity),
           std::abs(xi_from_product(product, identity).value - xi_limit)});
  }
  const auto& last = t.rows.back();
  r.controls.push_back(detail::control("both conditions and the xi gap vanish along the sequence",
                                       last[1] <= p.final_tol && last[2] == 0.0 && last[3] <= p.final_tol,
                                       "product sup " + detail::num(last[1]) + ", xi gap " + detail::num(last[3])));

  // Y_n = -X against Y = X for symmetric X: equal Markov pairs, different joint laws
  Table ex{"diagnostics_reflection", {"product_distance", "joint_distance"}, {}};
  const auto w = CopulaSpec::countermonotone(), m = CopulaSpec::comonotone();
  ex.add({sup_distance(CopulaSpec::grid(markov_product(w, p.product_grid)),
                       CopulaSpec::grid(markov_product(m, p.product_grid)), p.product_grid),
          sup_distance(w, m, p.grid)});
  r.controls.push_back(detail::control("reflection control: products agree, joint laws differ",
                                       ex.rows[0][0] <= 1e-9 && ex.rows[0][1] >= p.joint_floor,
                                       "product " + detail::num(ex.rows[0][0]) + ", joint " + detail::num(ex.rows[0][1])));

  // shuffles: joint laws approach Pi while the Markov pair stays at M
  Table sh{"diagnostics_shuffle", {"stripes", "joint_distance", "product_distance"}, {}};
  const auto pi = CopulaSpec::independence();
  const auto pi_product = CopulaSpec::grid(markov_product(pi, p.product_grid));
  bool product_stuck = true, joint_shrinks = true;
  for (int n : p.stripes) {
    const auto c = CopulaSpec::shuffle_mod(n);
    const double joint = sup_distance(c, pi, p.grid);
    const double product = sup_distance(CopulaSpec::grid(markov_product(c, p.product_grid)), pi_product, p.product_grid);
    sh.add({static_cast<double>(n), joint, product});
    product_stuck = product_stuck && product >= p.product_floor;
    joint_shrinks = joint_shrinks && joint <= 0.25 / n + 1e-12;
  }
  r.controls.push_back(detail::control("shuffle control: joint distance shrinks like 1/(4n)", joint_shrinks, ""));
  r.controls.push_back(detail::control("shuffle control: product distance stays above floor", product_stuck,
                                       "floor " + detail::num(p.product_floor)));

  Plot plot{"diagnostics", "Markov product diagnostics (" + p.family + ")", "step", "value", {}};
  std::vector<double> steps;
  for (std::size_t k = 0; k < t.rows.size(); ++k) steps.push_back(static_cast<double>(k + 1));
  plot.series.push_back({"product sup distance", LineStyle::Solid, steps, detail::column_of(t, 1)});
  plot.series.push_back({"range deviation", LineStyle::Solid, steps, detail::column_of(t, 2)});
  plot.series.push_back({"xi gap", LineStyle::Dotted, steps, detail::column_of(t, 3)});
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(ex));
  r.tables.push_back(std::move(sh));
  r.plots.push_back(std::move(plot));
  return r;
}

// --------------------------------------------------------------- dispatch

/// Validates the experiment's parameters from the config, runs it and fills metadata.
inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  const std::string& e = c.experiment;
  if (e == "shuffle") r = run_shuffle_counterexample(ShuffleParams::from_config(c));
  else if (e == "additive-error") r = run_additive_error(AdditiveErrorParams::from_config(c));
  else if (e == "equicorrelated") r = run_equicorrelated(EquicorrelatedParams::from_config(c));
  else if (e == "t4d") r = run_4d_t(T4dParams::from_config(c));
  else if (e == "dirac") r = run_dirac_limit(DiracParams::from_config(c));
  else if (e == "si-convergence") r = run_si_convergence(SiConvergenceParams::from_config(c));
  else if (e == "diagnostics") r = run_markov_diagnostics(DiagnosticsParams::from_config(c));
  else fail(ErrorKind::InvalidParameter, "unknown experiment '" + e + "'");
  r.meta.experiment = e;
  r.meta.seed = c.seed;
  r.meta.samples = c.samples;
  r.meta.grid = c.grid;
  r.meta.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace ximarkov::lab
