// Population xi for a Gaussian copula two ways, then the rank estimator on a sample.

#include <cstdio>

#include "ximarkov/ximarkov.hpp"

int main() {
  using namespace ximarkov;
  const double rho = 0.5;
  const auto gaussian = CopulaSpec::gaussian(rho);

  const double closed = xi_gaussian(rho);
  const double quadrature = xi_population(gaussian, 128).value;

  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, rho, rho, 1.0;
  const EllipticalSpec spec(Eigen::VectorXd::Zero(2), SigmaPartition(sigma, 1), radial::Normal{});
  const auto data = sample_elliptical(spec, 20000, 7);
  const double estimate = xi_n(detail::column(data, 0), detail::column(data, 1));

  std::printf("closed form %.6f\nquadrature  %.6f\nxi_n        %.6f\n", closed, quadrature, estimate);
}
