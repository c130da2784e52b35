#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ximarkov/copula.hpp"
#include "ximarkov/normal.hpp"

using namespace ximarkov;

namespace {

std::vector<CopulaSpec> all_families() {
  return {CopulaSpec::independence(),  CopulaSpec::comonotone(),     CopulaSpec::countermonotone(),
          CopulaSpec::gaussian(0.5),   CopulaSpec::gaussian(-0.8),   CopulaSpec::gaussian(0.99),
          CopulaSpec::frank(5.0),      CopulaSpec::frank(-3.0),      CopulaSpec::clayton(2.0),
          CopulaSpec::clayton(0.3),    CopulaSpec::shuffle_mod(1),   CopulaSpec::shuffle_mod(3),
          CopulaSpec::shuffle_mod(16), CopulaSpec::grid(checkerboard(CopulaSpec::gaussian(0.4), 7))};
}

}  // namespace

TEST(CopulaCdf, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(cdf(CopulaSpec::independence(), 0.3, 0.4), 0.12);
  EXPECT_DOUBLE_EQ(cdf(CopulaSpec::comonotone(), 0.3, 0.4), 0.3);
  EXPECT_DOUBLE_EQ(cdf(CopulaSpec::countermonotone(), 0.3, 0.4), 0.0);
  EXPECT_NEAR(cdf(CopulaSpec::shuffle_mod(2), 0.25, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(cdf(CopulaSpec::gaussian(0.3), 0.5, 0.5), 0.25 + std::asin(0.3) / (2 * std::numbers::pi), 1e-12);
}

TEST(CopulaCdf, ShuffleAgainstBruteForce) {
  // P(X <= u, nX mod 1 <= v) by counting on a fine midpoint grid in X
  for (int n : {1, 2, 5}) {
    for (auto [u, v] : {std::pair{0.3, 0.7}, {0.55, 0.2}, {0.9, 0.9}}) {
      const int steps = 200000;
      int count = 0;
      for (int k = 0; k < steps; ++k) {
        const double x = (k + 0.5) / steps;
        if (x <= u && n * x - std::floor(n * x) <= v) ++count;
      }
      EXPECT_NEAR(cdf(CopulaSpec::shuffle_mod(n), u, v), static_cast<double>(count) / steps, 1e-5);
    }
  }
}

TEST(CopulaCdf, RejectsInvalidParameters) {
  EXPECT_THROW(CopulaSpec::clayton(0.0), Error);
  EXPECT_THROW(CopulaSpec::clayton(-1.0), Error);
  EXPECT_THROW(CopulaSpec::gaussian(1.5), Error);
  EXPECT_THROW(CopulaSpec::frank(0.0), Error);
  EXPECT_THROW(CopulaSpec::shuffle_mod(0), Error);
  EXPECT_THROW(cdf(CopulaSpec::independence(), 1.2, 0.5), Error);
  try {
    CopulaSpec::clayton(-2.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
}

TEST(CopulaProperty, AxiomsOnRandomRectangles) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& c : all_families()) {
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
      double u1 = unif(rng), u2 = unif(rng), v1 = unif(rng), v2 = unif(rng);
      if (u1 > u2) std::swap(u1, u2);
      if (v1 > v2) std::swap(v1, v2);
      const double mass = cdf(c, u2, v2) - cdf(c, u1, v2) - cdf(c, u2, v1) + cdf(c, u1, v1);
      if (mass < -1e-12) ++violations;
      if (std::abs(cdf(c, u1, 0.0)) > 1e-12 || std::abs(cdf(c, 0.0, v1)) > 1e-12) ++violations;
      if (std::abs(cdf(c, u1, 1.0) - u1) > 1e-12 || std::abs(cdf(c, 1.0, v1) - v1) > 1e-12) ++violations;
      const double w = cdf(c, u1, v1);
      if (w < std::max(u1 + v1 - 1.0, 0.0) - 1e-12 || w > std::min(u1, v1) + 1e-12) ++violations;
      if (std::abs(cdf(c, u2, v1) - cdf(c, u1, v1)) > u2 - u1 + 1e-12) ++violations;
    }
    EXPECT_EQ(violations, 0) << c.name();
  }
}

TEST(Partial1, ClosedFormValues) {
  EXPECT_NEAR(partial1(CopulaSpec::independence(), 0.7, 0.4).value, 0.4, 1e-12);
  EXPECT_EQ(partial1(CopulaSpec::comonotone(), 0.3, 0.6).value, 1.0);
  EXPECT_EQ(partial1(CopulaSpec::comonotone(), 0.6, 0.3).value, 0.0);
  EXPECT_NEAR(partial1(CopulaSpec::gaussian(0.5), 0.5, 0.5).value, 0.5, 1e-12);
  // conditional normal formula at an off-centre point
  const double t = 0.2, u = 0.7, rho = 0.5;
  const double expected = normal::cdf((normal::quantile(u) - rho * normal::quantile(t)) / std::sqrt(1 - rho * rho));
  EXPECT_NEAR(partial1(CopulaSpec::gaussian(rho), t, u).value, expected, 1e-10);
}

TEST(Partial1, GridUsesDifferencesAndFlagsJumpLines) {
  const auto g = CopulaSpec::grid(CopulaGrid::independence(8));
  const auto inside = partial1(g, 0.3, 0.4);
  EXPECT_NEAR(inside.value, 0.4, 1e-9);
  EXPECT_FALSE(inside.one_sided);
  const auto on_line = partial1(g, 0.25, 0.4);
  EXPECT_TRUE(on_line.one_sided);
  EXPECT_NEAR(on_line.value, 0.4, 1e-9);
}

TEST(CopulaGrid, ValidatesMarginsAndMass) {
  EXPECT_THROW(CopulaGrid::from_values(2, {0, 0, 0, 0, 0.3, 0.4, 0, 0.5, 1.0}), Error);
  EXPECT_THROW(CopulaGrid::from_values(2, {0, 0, 0}), Error);
  // negative mass in the lower-left cell
  EXPECT_THROW(CopulaGrid::from_values(2, {0, 0, 0, 0, 0.6, 0.5, 0, 0.5, 1.0}), Error);
  const auto m = CopulaGrid::from_values(2, {0, 0, 0, 0, 0.5, 0.5, 0, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(m.cdf(0.5, 0.5), 0.5);
  try {
    CopulaGrid::from_values(1, {0, 0, 0, 0.9});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidGrid);
  }
}

TEST(MarkovProduct, FixedPoints) {
  const int m = 32;
  const auto pi = CopulaSpec::grid(markov_product(CopulaSpec::independence(), m));
  EXPECT_LT(sup_distance(pi, CopulaSpec::independence(), m), 1e-10);
  const auto mm = CopulaSpec::grid(markov_product(CopulaSpec::comonotone(), m));
  EXPECT_LT(sup_distance(mm, CopulaSpec::comonotone(), m), 1e-10);
  const auto ww = CopulaSpec::grid(markov_product(CopulaSpec::countermonotone(), m));
  EXPECT_LT(sup_distance(ww, CopulaSpec::comonotone(), m), 1e-10);
}

TEST(MarkovProduct, GaussianParameterSquares) {
  const int m = 64;
  for (double rho : {0.6, -0.7}) {
    const auto p = CopulaSpec::grid(markov_product(CopulaSpec::gaussian(rho), m));
    EXPECT_LT(sup_distance(p, CopulaSpec::gaussian(rho * rho), m), 1e-4) << rho;
  }
}

TEST(MarkovProduct, FrankProductAgainstMonteCarloOfConditionalCopies) {
  // Y, Y' drawn independently from the conditional law given a shared X
  const auto c = CopulaSpec::frank(4.0);
  const auto product = markov_product(c, 16);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto draw = [&](double t) {
    const double w = unif(rng);
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 50; ++k) {
      const double mid = 0.5 * (lo + hi);
      (partial1(c, t, mid).value < w ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const int n = 40000;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const double t = unif(rng);
    if (draw(t) <= 0.5 && draw(t) <= 0.5) ++count;
  }
  EXPECT_NEAR(product.cdf(0.5, 0.5), static_cast<double>(count) / n, 0.01);
}

TEST(MarkovProductProperty, ExchangeableAndTwoIncreasing) {
  for (const auto& c : {CopulaSpec::gaussian(-0.9), CopulaSpec::frank(7.0), CopulaSpec::clayton(1.5),
                        CopulaSpec::shuffle_mod(3)}) {
    const auto g = markov_product(c, 32);
    EXPECT_LE(g.max_asymmetry(), 1e-12) << c.name();
    EXPECT_GE(g.min_rectangle_mass(), -1e-12) << c.name();
  }
}

TEST(MarkovProductProperty, PanelDoublingIsStable) {
  QuadratureOptions coarse, fine;
  fine.panels = 2 * coarse.panels;
  for (const auto& c : {CopulaSpec::gaussian(0.5), CopulaSpec::frank(3.0), CopulaSpec::clayton(2.0)}) {
    const auto a = markov_product(c, 16, coarse), b = markov_product(c, 16, fine);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
    EXPECT_LT(worst, 1e-6) << c.name();
  }
}

TEST(GeneralizedMarkovProduct, IdentityProfileMatchesPlainProduct) {
  for (const auto& c : {CopulaSpec::comonotone(), CopulaSpec::gaussian(0.3)}) {
    const auto a = generalized_markov_product(c, RangeProfile::identity(), 16);
    const auto b = markov_product(c, 16);
    for (std::size_t k = 0; k < a.values().size(); ++k) EXPECT_NEAR(a.values()[k], b.values()[k], 1e-9);
  }
}

TEST(GeneralizedMarkovProduct, DiracProfileGivesIndependence) {
  for (const auto& c : {CopulaSpec::comonotone(), CopulaSpec::gaussian(0.7), CopulaSpec::shuffle_mod(4)}) {
    const auto g = CopulaSpec::grid(generalized_markov_product(c, RangeProfile::dirac(), 16));
    EXPECT_EQ(sup_distance(g, CopulaSpec::independence(), 16), 0.0) << c.name();
  }
}

TEST(GeneralizedMarkovProduct, TwoAtomsMixConditionalBlocks) {
  const std::vector<double> masses{0.5, 0.5};
  const auto g = generalized_markov_product(CopulaSpec::comonotone(), RangeProfile::discrete(masses), 16);
  // blocks [0,1/2] and [1/2,1] each carry conditional uniforms: 0.5 * (1*1) + 0.5 * 0
  EXPECT_NEAR(g.cdf(0.5, 0.5), 0.5, 1e-12);
  EXPECT_NEAR(g.cdf(0.25, 0.25), 0.5 * 0.5 * 0.5, 1e-12);
}

TEST(Distances, KnownValues) {
  const std::vector<double> us{0.25, 0.5, 0.75};
  const auto pi = CopulaSpec::independence(), m = CopulaSpec::comonotone();
  EXPECT_NEAR(d1_distance(pi, pi, us), 0.0, 1e-15);
  EXPECT_NEAR(d1_distance(m, pi, us), 0.5, 1e-10);
  EXPECT_EQ(sup_distance(pi, pi, 64), 0.0);
  EXPECT_NEAR(sup_distance(m, pi, 64), 0.25, 1e-15);
  for (int n : {2, 8, 32}) {
    const auto s = CopulaSpec::shuffle_mod(n);
    EXPECT_LE(sup_distance(s, pi, 128), 1.0 / n + 1e-12);
    EXPECT_GT(d1_distance(s, pi, us), 0.2);
  }
}

TEST(DistancesProperty, ZeroD1ImpliesSmallSup) {
  const std::vector<double> us{0.1, 0.3, 0.5, 0.7, 0.9};
  const auto a = CopulaSpec::gaussian(0.4);
  const auto b = CopulaSpec::gaussian(0.4);
  EXPECT_LT(d1_distance(a, b, us), 1e-12);
  EXPECT_LT(sup_distance(a, b, 64), 1e-12);
}

TEST(Checkerboard, ExactCasesAndConvergence) {
  for (int m : {1, 3, 10}) {
    EXPECT_LT(sup_distance(CopulaSpec::grid(checkerboard(CopulaSpec::independence(), m)), CopulaSpec::independence(), 40),
              1e-15);
  }
  EXPECT_DOUBLE_EQ(checkerboard(CopulaSpec::comonotone(), 2).cdf(0.5, 0.5), 0.5);
  const std::vector<double> us{0.25, 0.5, 0.75};
  const auto g = CopulaSpec::gaussian(0.5);
  double previous = 1.0;
  for (int m : {8, 32, 128}) {
    const double d = d1_distance(CopulaSpec::grid(checkerboard(g, m)), g, us);
    EXPECT_LT(d, previous) << m;
    previous = d;
  }
}

TEST(StochasticIncrease, KnownFamilies) {
  EXPECT_TRUE(is_si(CopulaSpec::gaussian(0.5), 32).si);
  EXPECT_TRUE(is_si(CopulaSpec::independence(), 32).si);
  EXPECT_TRUE(is_si(CopulaSpec::clayton(2.0), 32).si);
  EXPECT_TRUE(is_si(CopulaSpec::frank(3.0), 32).si);
  const auto shuffle = is_si(CopulaSpec::shuffle_mod(2), 32);
  EXPECT_FALSE(shuffle.si);
  EXPECT_GT(shuffle.worst_violation, 0.5);
  EXPECT_FALSE(is_si(CopulaSpec::gaussian(-0.5), 32).si);
}
