#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cte/numeric.hpp"

namespace cte {

// singular values below rank_tol * sigma_max are treated as zero
inline constexpr double kRankTol = 1e-10;

struct SvdPinv {
  Eigen::MatrixXd pinv;
  double min_singular = 0.0;  // smallest singular value (not thresholded)
  double max_singular = 0.0;
  int rank = 0;
};

inline SvdPinv svd_pinv(const Eigen::MatrixXd& A, double rank_tol = kRankTol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  SvdPinv out;
  out.max_singular = s.size() ? s(0) : 0.0;
  out.min_singular = s.size() ? s(s.size() - 1) : 0.0;
  double cut = rank_tol * out.max_singular;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
      ++out.rank;
    }
  }
  out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

inline double min_singular_value(const Eigen::MatrixXd& A) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  return s.size() ? s(s.size() - 1) : 0.0;
}

// min-norm least squares via SVD; residual is invariant under invertible
// re-parameterization of the columns of A
inline Eigen::MatrixXd least_squares(const Eigen::MatrixXd& A,
                                     const Eigen::MatrixXd& B,
                                     double rank_tol = kRankTol) {
  return svd_pinv(A, rank_tol).pinv * B;
}

inline double min_eigenvalue_sym(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  CTE_CHECK(es.info() == Eigen::Success, "eigensolver failed");
  return es.eigenvalues()(0);
}

}  // namespace cte
