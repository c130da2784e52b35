#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ximarkov/error.hpp"
#include "ximarkov/knn.hpp"
#include "ximarkov/measures.hpp"
#include "ximarkov/random.hpp"

namespace ximarkov {

namespace detail {

// r_i = #{j : y_j <= y_i} and l_i = #{j : y_j >= y_i}.
struct ResponseRanks {
  std::vector<std::int64_t> r, l;
  std::int64_t denominator = 0;  // sum of l_i (n - l_i)
};

inline ResponseRanks response_ranks(std::span<const double> y) {
  const auto n = static_cast<std::int64_t>(y.size());
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  ResponseRanks out;
  out.r.resize(y.size());
  out.l.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.r[i] = std::upper_bound(sorted.begin(), sorted.end(), y[i]) - sorted.begin();
    out.l[i] = n - (std::lower_bound(sorted.begin(), sorted.end(), y[i]) - sorted.begin());
    out.denominator += out.l[i] * (n - out.l[i]);
  }
  require(out.denominator > 0, ErrorKind::DegenerateResponse, "response is constant");
  return out;
}

inline void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) require(std::isfinite(x), ErrorKind::InvalidParameter, std::string(what) + " has non-finite values");
}

inline std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = m(i, j);
  return out;
}

}  // namespace detail

/// Rank statistic for xi(Y, X): sort by x (ties in x broken at random from seed),
/// then 1 - n * sum |r_{i+1} - r_i| / (2 * sum l_i (n - l_i)). Lies in [-1/2, 1].
inline double xi_n(std::span<const double> x, std::span<const double> y, std::uint64_t seed = 0) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidParameter, "xi_n needs n >= 2 pairs");
  detail::require_finite(x, "x");
  detail::require_finite(y, "y");
  const auto ranks = detail::response_ranks(y);

  Rng rng(seed);
  std::vector<std::uint64_t> key(x.size());
  for (auto& k : key) k = rng();
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    if (key[a] != key[b]) return key[a] < key[b];
    return a < b;
  });

  std::int64_t total_variation = 0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k)
    total_variation += std::abs(ranks.r[order[k + 1]] - ranks.r[order[k]]);
  const auto n = static_cast<double>(x.size());
  return 1.0 - n * static_cast<double>(total_variation) / (2.0 * static_cast<double>(ranks.denominator));
}

/// Nearest-neighbour statistic for xi(Y, X) with vector X:
/// sum (n min(r_i, r_N(i)) - l_i^2) / sum l_i (n - l_i), N(i) the Euclidean nearest neighbour of X_i.
inline double xi_n_knn(const Eigen::MatrixXd& x, std::span<const double> y) {
  require(x.rows() == static_cast<Eigen::Index>(y.size()) && y.size() >= 3, ErrorKind::InvalidParameter,
          "xi_n_knn needs n >= 3 rows");
  require(x.cols() >= 1 && x.allFinite(), ErrorKind::InvalidParameter, "predictors must be finite");
  detail::require_finite(y, "y");
  const auto ranks = detail::response_ranks(y);
  const auto nn = KdTree(x).all_nearest_others();
  const auto n = static_cast<std::int64_t>(y.size());
  std::int64_t numerator = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    numerator += n * std::min(ranks.r[i], ranks.r[nn[i]]) - ranks.l[i] * ranks.l[i];
  return static_cast<double>(numerator) / static_cast<double>(ranks.denominator);
}

/// Chained estimator of T(Y, X): numerator terms condition on (X, Y_1..Y_{i-1}),
/// denominator terms on (Y_1..Y_{i-1}) with the first one zero.
inline BoundedValue t_n(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  require(x.rows() == y.rows() && x.rows() >= 3, ErrorKind::InvalidParameter, "t_n needs n >= 3 rows");
  require(y.cols() >= 1, ErrorKind::InvalidParameter, "t_n needs at least one response");
  const Eigen::Index q = y.cols();
  std::vector<double> with(q), without(q, 0.0);
  for (Eigen::Index i = 0; i < q; ++i) {
    const auto yi = detail::column(y, i);
    Eigen::MatrixXd joint(x.rows(), x.cols() + i);
    joint << x, y.leftCols(i);
    with[i] = xi_n_knn(joint, yi);
    if (i > 0) without[i] = xi_n_knn(y.leftCols(i), yi);
  }
  return t_chain(with, without);
}

/// Pearson correlation of (y_i, y_N(i)) with N(i) the nearest neighbour of X_i, clamped to [0, 1].
inline BoundedValue lambda_n(const Eigen::MatrixXd& x, std::span<const double> y) {
  require(x.rows() == static_cast<Eigen::Index>(y.size()) && y.size() >= 3, ErrorKind::InvalidParameter,
          "lambda_n needs n >= 3 rows");
  require(x.allFinite(), ErrorKind::InvalidParameter, "predictors must be finite");
  detail::require_finite(y, "y");
  const auto nn = KdTree(x).all_nearest_others();
  std::vector<double> copy(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) copy[i] = y[nn[i]];
  const auto corr = lambda_from_pairs(y, copy);
  return clamp_unit(corr.raw_value);
}

}  // namespace ximarkov
