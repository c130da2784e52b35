#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ximarkov/error.hpp"

namespace ximarkov {

/// Relative eigenvalue cutoff used for ranks, pseudoinverses and factorizations.
inline constexpr double kEigenCutoff = 1e-10;

/// Symmetric PSD scale matrix split after the first p coordinates:
/// [[S11, S12], [S21, S22]] with S11 of size p x p.
class SigmaPartition {
 public:
  SigmaPartition(Eigen::MatrixXd sigma, int p) : sigma_(std::move(sigma)), p_(p) {
    require(sigma_.rows() == sigma_.cols(), ErrorKind::InvalidParameter, "scale matrix must be square");
    require(p_ >= 1 && p_ < sigma_.rows(), ErrorKind::InvalidParameter, "partition needs p >= 1 and q >= 1");
    require(sigma_.allFinite(), ErrorKind::InvalidParameter, "scale matrix has non-finite entries");
    require((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::InvalidParameter,
            "scale matrix is not symmetric");
    sigma_ = (0.5 * (sigma_ + sigma_.transpose())).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-10, ErrorKind::InvalidParameter,
            "scale matrix is not positive semi-definite");
  }

  /// All p+q coordinates share unit variance and pairwise correlation rho.
  static SigmaPartition equicorrelated(int p, int q, double rho) {
    const int d = p + q;
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(d, d, rho);
    s.diagonal().setOnes();
    return {s, p};
  }

  int p() const { return p_; }
  int q() const { return static_cast<int>(sigma_.rows()) - p_; }
  const Eigen::MatrixXd& full() const { return sigma_; }
  Eigen::MatrixXd s11() const { return sigma_.topLeftCorner(p_, p_); }
  Eigen::MatrixXd s12() const { return sigma_.topRightCorner(p_, q()); }
  Eigen::MatrixXd s21() const { return sigma_.bottomLeftCorner(q(), p_); }
  Eigen::MatrixXd s22() const { return sigma_.bottomRightCorner(q(), q()); }

 private:
  Eigen::MatrixXd sigma_;
  int p_;
};

/// Moore-Penrose inverse of a symmetric matrix; eigenvalues below cutoff * lambda_max are dropped.
inline Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& sym, double cutoff = kEigenCutoff) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (top > 0.0 && std::abs(lambda(i)) > cutoff * top) inv(i) = 1.0 / lambda(i);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

inline int numerical_rank(const Eigen::MatrixXd& sym, double cutoff = kEigenCutoff) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  return static_cast<int>((lambda.array().abs() > cutoff * top).count());
}

/// A (k x d) with A^T A = sym and k = numerical rank.
inline Eigen::MatrixXd full_rank_factor(const Eigen::MatrixXd& sym, double cutoff = kEigenCutoff) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = std::max(lambda.maxCoeff(), 0.0);
  require(top > 0.0, ErrorKind::InvalidParameter, "scale matrix is zero");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = lambda.size() - 1; i >= 0; --i)
    if (lambda(i) > cutoff * top) kept.push_back(i);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(kept.size()), sym.cols());
  for (std::size_t r = 0; r < kept.size(); ++r)
    a.row(static_cast<Eigen::Index>(r)) = std::sqrt(lambda(kept[r])) * es.eigenvectors().col(kept[r]).transpose();
  return a;
}

}  // namespace ximarkov
