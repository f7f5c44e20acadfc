// SPDX-License-Identifier: MIT
/// @file estimator.cpp
#include "jlbo/estimator.hpp"

#include <Eigen/SVD>

namespace jlbo {

Eigen::VectorXcd least_squares_gains(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& y) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(y);
}

Eigen::VectorXcd least_squares_residual(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& y,
                                        const Eigen::VectorXcd& est) {
  return y - a * est;
}

}  // namespace jlbo
