#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cte/linalg.hpp"
#include "cte/numeric.hpp"

namespace cte {

struct ProbeModel {
  Eigen::MatrixXd W;    // features x targets
  Eigen::RowVectorXd b; // intercept, unpenalized
  double ridge = 0.0;

  Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const {
    return (X * W).rowwise() + b;
  }
};

// Ridge least squares with unpenalized intercept. ridge = 0 is permitted but
// a singular system is reported instead of being silently regularized.
inline ProbeModel fit_linear_probe(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                   double ridge) {
  CTE_CHECK(X.rows() >= 1 && X.rows() == Y.rows(), "probe: bad shapes");
  CTE_CHECK(ridge >= 0.0, "probe: ridge must be >= 0");
  const int p = static_cast<int>(X.cols());
  Eigen::MatrixXd A(X.rows(), p + 1);
  A << X, Eigen::VectorXd::Ones(X.rows());
  Eigen::MatrixXd coef;
  if (ridge == 0.0) {
    SvdPinv sp = svd_pinv(A);
    if (sp.rank < p + 1) {
      throw Error("fit_linear_probe: singular system with ridge = 0 (rank " +
                  std::to_string(sp.rank) + " of " + std::to_string(p + 1) +
                  "); pass a positive ridge to regularize");
    }
    coef = sp.pinv * Y;
  } else {
    Eigen::MatrixXd G = A.transpose() * A;
    for (int i = 0; i < p; ++i) G(i, i) += ridge;
    coef = G.ldlt().solve(A.transpose() * Y);
  }
  ProbeModel m;
  m.W = coef.topRows(p);
  m.b = coef.row(p);
  m.ridge = ridge;
  return m;
}

inline Eigen::MatrixXd one_hot(const std::vector<int>& labels, int num_classes) {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<int>(labels.size()),
                                            num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CTE_CHECK(labels[i] >= 0 && labels[i] < num_classes, "one_hot: label out of range");
    Y(static_cast<int>(i), labels[i]) = 1.0;
  }
  return Y;
}

// one-vs-rest ridge with argmax decoding; ties go to the lowest index
inline double probe_accuracy(const ProbeModel& m, const Eigen::MatrixXd& X,
                             const std::vector<int>& labels) {
  Eigen::MatrixXd S = m.predict(X);
  int correct = 0;
  for (int i = 0; i < S.rows(); ++i) {
    int arg = 0;
    for (int j = 1; j < S.cols(); ++j) {
      if (S(i, j) > S(i, arg)) arg = j;
    }
    if (arg == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(S.rows());
}

}  // namespace cte
