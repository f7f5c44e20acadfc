// SPDX-License-Identifier: MIT
/// @file estimator.hpp
/// @brief Least-squares path-gain estimation against the two structured
///        factorizations of the received stack.
#pragma once

#include <Eigen/Dense>

namespace jlbo {

/// Minimum-norm least-squares solve est = argmin |y - A est| via a
/// singular-value decomposition with relative cutoff 1e-10 on the largest
/// singular value.
Eigen::VectorXcd least_squares_gains(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& y);

/// Residual y - A est of the least-squares solve.
Eigen::VectorXcd least_squares_residual(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& y,
                                        const Eigen::VectorXcd& est);

}  // namespace jlbo
