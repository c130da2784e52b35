#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "support.hpp"
#include "ximarkov/estimators.hpp"
#include "ximarkov/models.hpp"
#include "ximarkov/normal.hpp"

using namespace ximarkov;
using ximarkov::testing::corr2;
using ximarkov::testing::ks_distance;

namespace {

Eigen::MatrixXd sigma3() {
  Eigen::MatrixXd s(3, 3);
  s << 2.0, 0.3, 0.8, 0.3, 1.0, -0.4, 0.8, -0.4, 1.5;
  return s;
}

std::vector<std::vector<double>> conditioning_points() {
  return {{0.0, 0.0}, {1.0, -0.5}, {-2.0, 0.7}, {0.3, 2.5}, {3.0, 3.0}};
}

}  // namespace

TEST(SampleElliptical, StandardNormalMoments) {
  const int n = 20000;
  const EllipticalSpec spec(Eigen::VectorXd::Zero(2), SigmaPartition(Eigen::MatrixXd::Identity(2, 2), 1),
                            radial::Normal{});
  const auto d = sample_elliptical(spec, n, 1);
  const double tol = 4.0 / std::sqrt(n);
  EXPECT_LT(std::abs(d.col(0).mean()), tol);
  EXPECT_LT(std::abs(d.col(1).mean()), tol);
  EXPECT_LT(std::abs(ximarkov::testing::pearson(detail::column(d, 0), detail::column(d, 1))), tol);
  EXPECT_LT(ks_distance(detail::column(d, 0), normal::cdf), 0.02);
}

TEST(SampleElliptical, RankOneForcesEquality) {
  const EllipticalSpec spec(Eigen::VectorXd::Zero(2), SigmaPartition(Eigen::MatrixXd::Ones(2, 2), 1),
                            radial::StudentT{4.0});
  const auto d = sample_elliptical(spec, 1000, 2);
  for (Eigen::Index i = 0; i < d.rows(); ++i) EXPECT_NEAR(d(i, 1) - d(i, 0), 0.0, 1e-12);
}

TEST(SampleElliptical, LargeNuApproachesNormal) {
  const EllipticalSpec spec(Eigen::VectorXd::Zero(2), SigmaPartition(corr2(0.3), 1), radial::StudentT{200.0});
  const auto d = sample_elliptical(spec, 10000, 3);
  EXPECT_LT(ks_distance(detail::column(d, 1), normal::cdf), 0.02);
}

TEST(SampleElliptical, StudentMarginalsAndDeterminism) {
  Eigen::VectorXd mu(2);
  mu << 1.0, -2.0;
  const EllipticalSpec spec(mu, SigmaPartition(4.0 * corr2(0.5), 1), radial::StudentT{5.0});
  const auto d = sample_elliptical(spec, 10000, 4);
  const boost::math::students_t t5(5.0);
  EXPECT_LT(ks_distance(detail::column(d, 0), [&](double x) { return boost::math::cdf(t5, (x - 1.0) / 2.0); }), 0.02);
  EXPECT_TRUE(d.isApprox(sample_elliptical(spec, 10000, 4), 0.0));
}

TEST(SampleElliptical, RejectsNonPsdScale) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(SigmaPartition(bad, 1), Error);
}

TEST(ConditionalElliptical, NormalMatchesGaussianConditional) {
  Eigen::VectorXd mu(3);
  mu << 0.5, -1.0, 2.0;
  const EllipticalSpec spec(mu, SigmaPartition(sigma3(), 2), radial::Normal{});
  const Eigen::MatrixXd s = sigma3();
  const Eigen::VectorXd w = s.topLeftCorner(2, 2).ldlt().solve(s.col(2).head(2));
  const double var = s(2, 2) - s.col(2).head(2).dot(w);
  for (const auto& x : conditioning_points()) {
    const auto law = conditional_elliptical(spec, x);
    const double mean = mu(2) + w(0) * (x[0] - mu(0)) + w(1) * (x[1] - mu(1));
    EXPECT_NEAR(law.mu_x, mean, 1e-12);
    EXPECT_NEAR(law.sigma_star, var, 1e-12);
    for (double y : {-3.0, -0.5, 0.0, 1.0, 2.0, 4.0})
      EXPECT_NEAR(law.cdf(y), normal::cdf((y - mean) / std::sqrt(var)), 1e-6);
  }
}

TEST(ConditionalElliptical, StudentMatchesInflatedT) {
  const double nu = 3.0;
  const EllipticalSpec spec(Eigen::VectorXd::Zero(3), SigmaPartition(sigma3(), 2), radial::StudentT{nu});
  const boost::math::students_t t(nu + 2);
  for (const auto& x : conditioning_points()) {
    const auto law = conditional_elliptical(spec, x);
    const double scale = std::sqrt(law.sigma_star * (nu + law.q_x) / (nu + 2));
    for (double y : {-3.0, -1.0, 0.0, 0.5, 2.0, 5.0})
      EXPECT_NEAR(law.cdf(y), boost::math::cdf(t, (y - law.mu_x) / scale), 1e-5);
  }
}

TEST(ConditionalElliptical, CustomRadialWithoutDensityMatchesNormal) {
  // chi radial with 3 degrees of freedom, density taken from differences of the CDF
  radial::Custom chi3;
  chi3.cdf = [](double r) { return r <= 0.0 ? 0.0 : boost::math::gamma_p(1.5, 0.5 * r * r); };
  chi3.sample = [](Rng& rng) { return std::sqrt(std::chi_squared_distribution<double>(3.0)(rng)); };
  const EllipticalSpec custom(Eigen::VectorXd::Zero(3), SigmaPartition(sigma3(), 2), chi3);
  const EllipticalSpec gauss(Eigen::VectorXd::Zero(3), SigmaPartition(sigma3(), 2), radial::Normal{});
  const std::vector<double> x{0.7, -0.2};
  const auto a = conditional_elliptical(custom, x), b = conditional_elliptical(gauss, x);
  for (double y : {-2.0, 0.0, 0.4, 1.5}) EXPECT_NEAR(a.cdf(y), b.cdf(y), 1e-5);
}

TEST(ConditionalElliptical, ZeroQuadraticFormUsesMarginalRadial) {
  const EllipticalSpec spec(Eigen::VectorXd::Zero(2), SigmaPartition(corr2(0.0), 1), radial::Normal{});
  const std::vector<double> x{0.0};
  const auto law = conditional_elliptical(spec, x);
  EXPECT_EQ(law.q_x, 0.0);
  for (double r : {0.2, 1.0, 2.5}) EXPECT_NEAR(law.radial_cdf(r), 2.0 * normal::cdf(r) - 1.0, 1e-6);
}

TEST(ConditionalElliptical, RadialCdfIsValid) {
  const EllipticalSpec spec(Eigen::VectorXd::Zero(3), SigmaPartition(sigma3(), 2), radial::StudentT{2.5});
  for (const auto& x : conditioning_points()) {
    const auto law = conditional_elliptical(spec, x);
    double previous = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double v = law.radial_cdf(0.05 * k);
      EXPECT_GE(v, previous - 1e-12);
      previous = v;
    }
    EXPECT_LT(law.radial_cdf(1e-9), 1e-6);
    EXPECT_GT(law.radial_cdf(1e6), 1.0 - 1e-6);
  }
}

TEST(ConditionalElliptical, BeyondSupportIsEmpty) {
  radial::Custom bounded;
  bounded.cdf = [](double r) { return std::clamp(r, 0.0, 1.0); };
  bounded.pdf = [](double r) { return r > 0.0 && r < 1.0 ? 1.0 : 0.0; };
  bounded.sample = [](Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
  const EllipticalSpec spec(Eigen::VectorXd::Zero(2), SigmaPartition(corr2(0.5), 1), bounded);
  const std::vector<double> x{5.0};
  try {
    conditional_elliptical(spec, x);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyConditioning);
  }
}

TEST(ConditionalElliptical, RankDeficientGivesPointMass) {
  const EllipticalSpec spec(Eigen::VectorXd::Zero(2), SigmaPartition(Eigen::MatrixXd::Ones(2, 2), 1),
                            radial::Normal{});
  const std::vector<double> x{0.8};
  const auto law = conditional_elliptical(spec, x);
  EXPECT_EQ(law.sigma_star, 0.0);
  EXPECT_EQ(law.cdf(0.79), 0.0);
  EXPECT_EQ(law.cdf(0.8), 1.0);
}

TEST(SampleL1, SimplexAndRadialNorm) {
  const auto unit = L1Spec::near_constant(3, 1.0, 1e-9);
  const auto d = sample_l1(unit, 2000, 5);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    EXPECT_NEAR(d.row(i).sum(), 1.0, 1e-8);
    EXPECT_GE(d.row(i).minCoeff(), 0.0);
  }
  // R = 1 exactly, d = 2: Y = 1 - X
  const L1Spec one(2, [](double r) { return r >= 1.0 ? 1.0 : 0.0; }, [](Rng&) { return 1.0; });
  const auto e = sample_l1(one, 5000, 6);
  for (Eigen::Index i = 0; i < e.rows(); ++i) EXPECT_NEAR(e(i, 0) + e(i, 1), 1.0, 1e-12);
  EXPECT_GT(xi_n(detail::column(e, 0), detail::column(e, 1)), 0.99);
}

TEST(SampleL1, ErlangGivesIndependentExponentials) {
  for (int d : {2, 3}) {
    const auto x = sample_l1(L1Spec::erlang(d), 10000, 7 + d);
    for (int j = 0; j < d; ++j)
      EXPECT_LT(ks_distance(detail::column(x, j), [](double v) { return v <= 0 ? 0.0 : 1.0 - std::exp(-v); }), 0.02);
    EXPECT_LT(std::abs(xi_n(detail::column(x, 0), detail::column(x, 1))), 0.05);
  }
}

TEST(SampleL1, NegativeRadialRejected) {
  const L1Spec bad(2, [](double r) { return r <= 0.0 ? 0.0 : 1.0; }, [](Rng&) { return -1.0; });
  try {
    sample_l1(bad, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidRadial);
  }
}

TEST(Williamson, ErlangGivesExponentialGenerator) {
  std::vector<double> xs;
  for (int k = 0; k <= 50; ++k) xs.push_back(0.1 * k);
  for (int d : {2, 3, 5}) {
    const auto g = williamson_generator(L1Spec::erlang(d).cdf, d, xs);
    for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_NEAR(g.phi[k], std::exp(-xs[k]), 1e-6);
    EXPECT_TRUE(g.nonincreasing);
    EXPECT_TRUE(g.convex);
    EXPECT_NEAR(g.phi[0], 1.0, 1e-10);
  }
}

TEST(Williamson, NearConstantRadialGivesLinearGenerator) {
  const auto spec = L1Spec::near_constant(2, 1.0, 1e-4);
  const std::vector<double> xs{0.0, 0.25, 0.5, 0.75, 0.9, 1.5};
  const auto g = williamson_generator(spec.cdf, 2, xs, 1e-6);
  for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_NEAR(g.phi[k], std::max(1.0 - xs[k], 0.0), 1e-3);
  EXPECT_TRUE(g.convex);
}

TEST(AdditiveError, Correlation) {
  EXPECT_EQ(additive_error_rho(0.0), 1.0);
  EXPECT_NEAR(additive_error_rho(1.0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_LT(additive_error_rho(1e6), 1e-5);
  EXPECT_NEAR(xi_gaussian(additive_error_rho(1.0)), 0.3100, 5e-4);
  EXPECT_THROW(additive_error_rho(-0.1), Error);
  const auto d = sample_elliptical(additive_error_spec(1.0), 50000, 11);
  EXPECT_NEAR(xi_n(detail::column(d, 0), detail::column(d, 1)), 0.3100, 0.02);
}
