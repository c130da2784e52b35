#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ximarkov/error.hpp"
#include "ximarkov/normal.hpp"
#include "ximarkov/quadrature.hpp"
#include "ximarkov/range_profile.hpp"

namespace ximarkov {

/// Doubly stochastic lattice: CDF values at (i/m, j/m), bilinear in between
/// (i.e. the checkerboard copula carried by these lattice values).
class CopulaGrid {
 public:
  /// values are row-major over i (first argument) then j, size (m+1)^2.
  /// Margins within margin_tol of their exact values are snapped.
  static CopulaGrid from_values(int m, std::vector<double> values, double margin_tol = 1e-6) {
    require(m >= 1, ErrorKind::InvalidGrid, "grid resolution must be positive");
    const std::size_t side = static_cast<std::size_t>(m) + 1;
    require(values.size() == side * side, ErrorKind::InvalidGrid, "grid needs (m+1)^2 values");
    CopulaGrid g;
    g.m_ = m;
    g.values_ = std::move(values);
    for (int i = 0; i <= m; ++i) {
      const double edge = static_cast<double>(i) / m;
      for (auto [ii, jj, target] : {std::tuple{i, 0, 0.0}, std::tuple{0, i, 0.0}, std::tuple{i, m, edge},
                                    std::tuple{m, i, edge}}) {
        double& v = g.ref(ii, jj);
        require(std::abs(v - target) <= margin_tol, ErrorKind::InvalidGrid,
                "grid margin off by " + std::to_string(v - target));
        v = target;
      }
    }
    require(g.min_rectangle_mass() >= -1e-12, ErrorKind::InvalidGrid, "grid is not 2-increasing");
    return g;
  }

  static CopulaGrid tabulate(int m, auto&& f) {
    std::vector<double> values;
    values.reserve((m + 1) * (m + 1));
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) values.push_back(f(static_cast<double>(i) / m, static_cast<double>(j) / m));
    return from_values(m, std::move(values));
  }

  static CopulaGrid independence(int m) {
    return tabulate(m, [](double u, double v) { return u * v; });
  }

  int resolution() const { return m_; }
  double at(int i, int j) const { return values_[index(i, j)]; }
  std::span<const double> values() const { return values_; }

  double cdf(double u, double v) const {
    const auto [i, s] = locate(u);
    const auto [j, r] = locate(v);
    const double c00 = at(i, j), c10 = at(i + 1, j), c01 = at(i, j + 1), c11 = at(i + 1, j + 1);
    return (1 - s) * (1 - r) * c00 + s * (1 - r) * c10 + (1 - s) * r * c01 + s * r * c11;
  }

  double min_rectangle_mass() const {
    double worst = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        worst = std::min(worst, at(i + 1, j + 1) - at(i + 1, j) - at(i, j + 1) + at(i, j));
    return worst;
  }

  double max_asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i <= m_; ++i)
      for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
    return worst;
  }

 private:
  CopulaGrid() = default;

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * (m_ + 1) + j; }
  double& ref(int i, int j) { return values_[index(i, j)]; }

  // cell index and local coordinate; the last cell is closed on the right
  std::pair<int, double> locate(double x) const {
    const double scaled = std::clamp(x, 0.0, 1.0) * m_;
    const int i = std::min(static_cast<int>(scaled), m_ - 1);
    return {i, scaled - i};
  }

  int m_ = 0;
  std::vector<double> values_;
};

namespace family {
struct Independence {};
struct Comonotone {};
struct Countermonotone {};
struct Gaussian {
  double rho;
};
struct Frank {
  double theta;
};
struct Clayton {
  double theta;
};
/// Copula of (X, nX mod 1) for uniform X.
struct ShuffleMod {
  int n;
};
}  // namespace family

/// A bivariate copula: a closed-form family member or a lattice.
class CopulaSpec {
 public:
  using GridRef = std::shared_ptr<const CopulaGrid>;
  using Kind = std::variant<family::Independence, family::Comonotone, family::Countermonotone, family::Gaussian,
                            family::Frank, family::Clayton, family::ShuffleMod, GridRef>;

  CopulaSpec(Kind kind) : kind_(std::move(kind)) { validate(); }  // NOLINT(implicit)

  static CopulaSpec independence() { return {family::Independence{}}; }
  static CopulaSpec comonotone() { return {family::Comonotone{}}; }
  static CopulaSpec countermonotone() { return {family::Countermonotone{}}; }
  static CopulaSpec gaussian(double rho) { return {family::Gaussian{rho}}; }
  static CopulaSpec frank(double theta) { return {family::Frank{theta}}; }
  static CopulaSpec clayton(double theta) { return {family::Clayton{theta}}; }
  static CopulaSpec shuffle_mod(int n) { return {family::ShuffleMod{n}}; }
  static CopulaSpec grid(CopulaGrid g) { return {std::make_shared<const CopulaGrid>(std::move(g))}; }

  const Kind& kind() const { return kind_; }

  template <class T>
  const T* get() const {
    return std::get_if<T>(&kind_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, family::Independence>) return "Pi";
          else if constexpr (std::is_same_v<T, family::Comonotone>) return "M";
          else if constexpr (std::is_same_v<T, family::Countermonotone>) return "W";
          else if constexpr (std::is_same_v<T, family::Gaussian>) return "Gaussian(" + std::to_string(k.rho) + ")";
          else if constexpr (std::is_same_v<T, family::Frank>) return "Frank(" + std::to_string(k.theta) + ")";
          else if constexpr (std::is_same_v<T, family::Clayton>) return "Clayton(" + std::to_string(k.theta) + ")";
          else if constexpr (std::is_same_v<T, family::ShuffleMod>) return "ShuffleMod(" + std::to_string(k.n) + ")";
          else return "Grid(" + std::to_string(k->resolution()) + ")";
        },
        kind_);
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, family::Gaussian>) {
            require(std::isfinite(k.rho) && std::abs(k.rho) <= 1.0, ErrorKind::InvalidParameter,
                    "Gaussian copula needs rho in [-1, 1]");
          } else if constexpr (std::is_same_v<T, family::Frank>) {
            require(std::isfinite(k.theta) && k.theta != 0.0 && std::abs(k.theta) <= 700.0,
                    ErrorKind::InvalidParameter, "Frank copula needs 0 < |theta| <= 700");
          } else if constexpr (std::is_same_v<T, family::Clayton>) {
            require(std::isfinite(k.theta) && k.theta > 0.0, ErrorKind::InvalidParameter,
                    "Clayton copula needs theta > 0");
          } else if constexpr (std::is_same_v<T, family::ShuffleMod>) {
            require(k.n >= 1, ErrorKind::InvalidParameter, "shuffle needs at least one stripe");
          } else if constexpr (std::is_same_v<T, GridRef>) {
            require(k != nullptr, ErrorKind::InvalidParameter, "null grid");
          }
        },
        kind_);
  }

  Kind kind_;
};

namespace detail {

inline void require_unit(double x, const char* what) {
  require(x >= 0.0 && x <= 1.0, ErrorKind::InvalidParameter, std::string(what) + " must lie in [0, 1]");
}

/// Gaussian with |rho| = 1 behaves as M or W.
inline const CopulaSpec::Kind& effective(const CopulaSpec::Kind& kind) {
  static const CopulaSpec::Kind m = family::Comonotone{};
  static const CopulaSpec::Kind w = family::Countermonotone{};
  if (const auto* g = std::get_if<family::Gaussian>(&kind)) {
    if (g->rho == 1.0) return m;
    if (g->rho == -1.0) return w;
  }
  return kind;
}

}  // namespace detail

/// C(u, v).
inline double cdf(const CopulaSpec& c, double u, double v) {
  detail::require_unit(u, "u");
  detail::require_unit(v, "v");
  return std::visit(
      [u, v](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, family::Independence>) {
          return u * v;
        } else if constexpr (std::is_same_v<T, family::Comonotone>) {
          return std::min(u, v);
        } else if constexpr (std::is_same_v<T, family::Countermonotone>) {
          return std::max(u + v - 1.0, 0.0);
        } else if constexpr (std::is_same_v<T, family::Gaussian>) {
          if (u == 0.0 || v == 0.0) return 0.0;
          if (u == 1.0) return v;
          if (v == 1.0) return u;
          return normal::bivariate_cdf(normal::quantile(u), normal::quantile(v), k.rho);
        } else if constexpr (std::is_same_v<T, family::Frank>) {
          if (u == 0.0 || v == 0.0) return 0.0;
          if (u == 1.0) return v;
          if (v == 1.0) return u;
          const double th = k.theta;
          return -std::log1p(std::expm1(-th * u) * std::expm1(-th * v) / std::expm1(-th)) / th;
        } else if constexpr (std::is_same_v<T, family::Clayton>) {
          if (u == 0.0 || v == 0.0) return 0.0;
          const double th = k.theta;
          return std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th);
        } else if constexpr (std::is_same_v<T, family::ShuffleMod>) {
          // k full stripes below u contribute v/n each, the partial stripe min(r, v)/n
          const double scaled = k.n * u;
          const double whole = std::min(std::floor(scaled), static_cast<double>(k.n));
          const double rest = scaled - whole;
          return (whole * v + std::min(rest, v)) / k.n;
        } else {
          return k->cdf(u, v);
        }
      },
      detail::effective(c.kind()));
}

/// First-argument partial derivative; one_sided marks evaluation on a jump line.
struct Partial {
  double value = 0.0;
  bool one_sided = false;
};

/// Points t in (0,1) where t -> d/dt C(t, u) may jump. Empty for smooth families.
inline std::vector<double> section_kinks(const CopulaSpec& c, double u) {
  std::vector<double> kinks;
  const auto add = [&kinks](double t) {
    if (t > 0.0 && t < 1.0) kinks.push_back(t);
  };
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, family::Comonotone>) {
          add(u);
        } else if constexpr (std::is_same_v<T, family::Countermonotone>) {
          add(1.0 - u);
        } else if constexpr (std::is_same_v<T, family::ShuffleMod>) {
          for (int s = 0; s < k.n; ++s) {
            add(static_cast<double>(s) / k.n);
            add((s + u) / k.n);
          }
        } else if constexpr (std::is_same_v<T, CopulaSpec::GridRef>) {
          for (int j = 1; j < k->resolution(); ++j) add(static_cast<double>(j) / k->resolution());
        }
      },
      detail::effective(c.kind()));
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  return kinks;
}

/// Finite-difference step for families without an analytic partial.
inline double finite_difference_step(const CopulaSpec& c) {
  int resolution = 1;
  if (const auto* s = c.get<family::ShuffleMod>()) resolution = s->n;
  if (const auto* g = c.get<CopulaSpec::GridRef>()) resolution = (*g)->resolution();
  return std::max(1e-5, 1.0 / (4.0 * resolution));
}

namespace detail {

// Central difference with the stencil clamped to [0,1] and to the smooth piece of
// the section containing t; on a kink the difference is one-sided to the right.
inline Partial clamped_difference(const CopulaSpec& c, double t, double u, std::span<const double> kinks) {
  const double h = finite_difference_step(c);
  const auto it = std::upper_bound(kinks.begin(), kinks.end(), t);
  const double piece_lo = it == kinks.begin() ? 0.0 : *(it - 1);
  const double piece_hi = it == kinks.end() ? 1.0 : *it;
  const bool on_kink = it != kinks.begin() && *(it - 1) == t;
  double lo = std::max(t - h, piece_lo);
  double hi = std::min(t + h, piece_hi);
  if (hi <= lo) {  // t == 1 or a degenerate piece
    lo = std::max(t - h, 0.0);
    hi = t;
  }
  return {(cdf(c, hi, u) - cdf(c, lo, u)) / (hi - lo), on_kink};
}

inline Partial partial1_with_kinks(const CopulaSpec& c, double t, double u, std::span<const double> kinks) {
  return std::visit(
      [&](const auto& k) -> Partial {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, family::Independence>) {
          return {u};
        } else if constexpr (std::is_same_v<T, family::Comonotone>) {
          return {u >= t ? 1.0 : 0.0};
        } else if constexpr (std::is_same_v<T, family::Countermonotone>) {
          return {t + u >= 1.0 ? 1.0 : 0.0};
        } else if constexpr (std::is_same_v<T, family::Gaussian>) {
          const double s = std::sqrt((1.0 - k.rho) * (1.0 + k.rho));
          return {normal::cdf((normal::quantile(u) - k.rho * normal::quantile(t)) / s)};
        } else if constexpr (std::is_same_v<T, family::Frank>) {
          if (u == 0.0) return {0.0};
          if (u == 1.0) return {1.0};
          const double th = k.theta;
          const double eu = std::expm1(-th * u);
          return {std::exp(-th * t) * eu / (std::expm1(-th) + std::expm1(-th * t) * eu)};
        } else if constexpr (std::is_same_v<T, family::Clayton>) {
          if (u == 0.0) return {0.0};
          if (u == 1.0) return {1.0};
          const double th = k.theta;
          return {std::pow(1.0 + std::pow(t, th) * (std::pow(u, -th) - 1.0), -(1.0 + th) / th)};
        } else {
          return clamped_difference(c, t, u, kinks);
        }
      },
      effective(c.kind()));
}

}  // namespace detail

/// d/dt C(t, u): closed form for the parametric families, clamped central
/// difference for ShuffleMod and grids.
inline Partial partial1(const CopulaSpec& c, double t, double u) {
  require(t > 0.0 && t < 1.0, ErrorKind::InvalidParameter, "t must lie in (0, 1)");
  detail::require_unit(u, "u");
  const auto kinks = section_kinks(c, u);
  return detail::partial1_with_kinks(c, t, u, kinks);
}

/// Generalized first partial w.r.t. the distribution of the first variable:
/// the chord slope of C(., u) across an atom, the ordinary partial elsewhere.
inline Partial partial1_generalized(const CopulaSpec& c, const RangeProfile& fx, double t, double u) {
  require(t > 0.0 && t < 1.0, ErrorKind::InvalidParameter, "t must lie in (0, 1)");
  const double hi = fx.upper(t);
  const double lo = fx.lower(t);
  if (hi > lo) return {(cdf(c, hi, u) - cdf(c, lo, u)) / (hi - lo)};
  return partial1(c, t, u);
}

namespace detail {

// Weighted section matrix: row k holds sqrt(w_k) * partial(t_k, u_j) over the
// lattice u_j = j/m, so that the product grid is rows^T * rows.
inline Eigen::MatrixXd section_rows(const CopulaSpec& c, const RangeProfile& fx, int m,
                                    const QuadratureOptions& opts) {
  std::vector<double> lattice(m + 1);
  for (int j = 0; j <= m; ++j) lattice[j] = static_cast<double>(j) / m;

  std::vector<std::vector<double>> kinks(m + 1);
  std::vector<double> all_breaks = lattice;
  for (int j = 0; j <= m; ++j) {
    kinks[j] = section_kinks(c, lattice[j]);
    all_breaks.insert(all_breaks.end(), kinks[j].begin(), kinks[j].end());
  }

  const auto base = gauss_legendre(opts.order);
  NodesWeights rule;
  for (const auto& [lo, hi] : fx.continuous_parts()) {
    auto edges = panel_edges(opts, lo, hi);
    for (double b : all_breaks)
      if (b > lo && b < hi) edges.push_back(b);
    const auto bp = merge_breakpoints(std::move(edges), lo, hi);
    auto part = composite_rule(bp, base);
    rule.nodes.insert(rule.nodes.end(), part.nodes.begin(), part.nodes.end());
    rule.weights.insert(rule.weights.end(), part.weights.begin(), part.weights.end());
  }

  const auto& atoms = fx.atoms();
  const Eigen::Index rows = static_cast<Eigen::Index>(rule.size() + atoms.size());
  Eigen::MatrixXd out(rows, m + 1);

  const auto* gauss = std::get_if<family::Gaussian>(&effective(c.kind()));
  std::vector<double> zu;
  if (gauss) {
    zu.resize(m + 1);
    for (int j = 0; j <= m; ++j) zu[j] = normal::quantile(lattice[j]);
  }
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = rule.nodes[k];
    const double sw = std::sqrt(rule.weights[k]);
    if (gauss) {
      const double zt = normal::quantile(t);
      const double s = std::sqrt((1.0 - gauss->rho) * (1.0 + gauss->rho));
      for (int j = 0; j <= m; ++j) out(k, j) = sw * normal::cdf((zu[j] - gauss->rho * zt) / s);
    } else {
      for (int j = 0; j <= m; ++j) out(k, j) = sw * partial1_with_kinks(c, t, lattice[j], kinks[j]).value;
    }
  }
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const double mass = atoms[a].mass();
    const double sw = std::sqrt(mass);
    const auto row = static_cast<Eigen::Index>(rule.size() + a);
    for (int j = 0; j <= m; ++j) {
      const double chord = (cdf(c, atoms[a].hi, lattice[j]) - cdf(c, atoms[a].lo, lattice[j])) / mass;
      out(row, j) = sw * chord;
    }
  }
  return out;
}

}  // namespace detail

/// Copula of the conditionally independent pair (Y, Y') when the first variable
/// has range profile fx: the integral over t of the generalized partials at u and v.
inline CopulaGrid generalized_markov_product(const CopulaSpec& c, const RangeProfile& fx, int m,
                                             const QuadratureOptions& opts = {}) {
  require(m >= 2, ErrorKind::InvalidParameter, "product grid resolution must be at least 2");
  if (fx.is_single_atom()) return CopulaGrid::independence(m);
  const Eigen::MatrixXd rows = detail::section_rows(c, fx, m, opts);
  Eigen::MatrixXd gram = rows.transpose() * rows;
  // exact symmetry regardless of the order the product kernel accumulates in
  gram = (0.5 * (gram + gram.transpose())).eval();
  std::vector<double> values(static_cast<std::size_t>((m + 1) * (m + 1)));
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) values[static_cast<std::size_t>(i) * (m + 1) + j] = gram(i, j);
  return CopulaGrid::from_values(m, std::move(values));
}

/// D * D on the (m+1)^2 lattice.
inline CopulaGrid markov_product(const CopulaSpec& c, int m, const QuadratureOptions& opts = {}) {
  return generalized_markov_product(c, RangeProfile::identity(), m, opts);
}

/// max over u in u_grid of the integral of |d1 A(t,u) - d1 B(t,u)| dt.
inline double d1_distance(const CopulaSpec& a, const CopulaSpec& b, std::span<const double> u_grid,
                          const QuadratureOptions& opts = {}) {
  require(!u_grid.empty(), ErrorKind::InvalidParameter, "d1 distance needs a nonempty u grid");
  double worst = 0.0;
  for (double u : u_grid) {
    detail::require_unit(u, "u");
    const auto ka = section_kinks(a, u);
    const auto kb = section_kinks(b, u);
    std::vector<double> extra = ka;
    extra.insert(extra.end(), kb.begin(), kb.end());
    const double value = integrate_composite(
        [&](double t) {
          return std::abs(detail::partial1_with_kinks(a, t, u, ka).value -
                          detail::partial1_with_kinks(b, t, u, kb).value);
        },
        0.0, 1.0, std::move(extra), opts);
    worst = std::max(worst, value);
  }
  return worst;
}

/// Lattice sup distance between two copula CDFs.
inline double sup_distance(const CopulaSpec& a, const CopulaSpec& b, int m) {
  require(m >= 1, ErrorKind::InvalidParameter, "lattice resolution must be positive");
  double worst = 0.0;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      const double u = static_cast<double>(i) / m, v = static_cast<double>(j) / m;
      worst = std::max(worst, std::abs(cdf(a, u, v) - cdf(b, u, v)));
    }
  }
  return worst;
}

/// Checkerboard approximation: C's mass on each of the m x m cells spread uniformly.
inline CopulaGrid checkerboard(const CopulaSpec& c, int m) {
  require(m >= 1, ErrorKind::InvalidParameter, "checkerboard resolution must be positive");
  return CopulaGrid::tabulate(m, [&c](double u, double v) { return cdf(c, u, v); });
}

struct SiReport {
  bool si = true;
  double worst_violation = 0.0;  // largest increase of t -> d1 C(t,u) between neighbours
  double at_t = 0.0;
  double at_u = 0.0;
};

/// Stochastically increasing check: t -> d1 C(t, u) non-increasing for every u,
/// sampled at cell midpoints in t and lattice points in u.
inline SiReport is_si(const CopulaSpec& c, int grid, double tol = 1e-8) {
  require(grid >= 2, ErrorKind::InvalidParameter, "SI check needs at least a 2-point grid");
  SiReport report;
  for (int j = 1; j < grid; ++j) {
    const double u = static_cast<double>(j) / grid;
    const auto kinks = section_kinks(c, u);
    double previous = detail::partial1_with_kinks(c, 0.5 / grid, u, kinks).value;
    for (int k = 1; k < grid; ++k) {
      const double t = (k + 0.5) / grid;
      const double current = detail::partial1_with_kinks(c, t, u, kinks).value;
      const double increase = current - previous;
      if (increase > report.worst_violation) {
        report.worst_violation = increase;
        report.at_t = t;
        report.at_u = u;
      }
      previous = current;
    }
  }
  report.si = report.worst_violation <= tol;
  return report;
}

}  // namespace ximarkov
