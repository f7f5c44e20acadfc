// SPDX-License-Identifier: MIT
/// @file fim.cpp
#include "jlbo/fim.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace jlbo {

std::vector<int> fim_identifiable(const FisherInfo& info, int n_bs, int n_paths) {
  std::vector<int> keep =
      info.half == KappaHalf::kUeSide ? kappa2_identifiable(n_bs, n_paths)
                                      : kappa1_identifiable(n_bs, n_paths);
  for (int i = info.location_dim; i < info.fim.rows(); ++i) keep.push_back(i);
  return keep;
}

FisherInfo fisher_information(const Scene& scene, const PathParams& paths,
                              const GainRealization& gains, const BeamWeights& weights,
                              const RisProfile& theta, const SystemConfig& cfg, KappaHalf half,
                              double sigma2) {
  FisherInfo info;
  info.half = half;
  info.sigma2 = sigma2;

  Eigen::MatrixXcd jac;     // gain-weighted location-derivative columns
  Eigen::MatrixXcd factor;  // gain-linear factorization
  if (half == KappaHalf::kUeSide) {
    const UeSideDerivativeBlocks blocks =
        ue_side_derivative_blocks(scene, paths, gains, weights, theta, cfg);
    const Eigen::VectorXcd h = gains.h_stacked();
    jac = Eigen::MatrixXcd::Zero(blocks.through_mu[0].rows(), blocks.through_mu[0].cols());
    for (std::size_t k = 0; k < blocks.through_mu.size(); ++k)
      jac += h[static_cast<int>(k)] * blocks.through_mu[k];
    factor = build_gamma(scene, paths, gains, weights, theta, cfg);
  } else {
    const BsSideDerivativeBlocks blocks =
        bs_side_derivative_blocks(scene, paths, gains, weights, theta, cfg);
    const Eigen::VectorXcd g = gains.g_stacked();
    jac = Eigen::MatrixXcd::Zero(blocks.xi[0].rows(), blocks.xi[0].cols());
    for (std::size_t k = 0; k < blocks.xi.size(); ++k)
      jac += g[static_cast<int>(k)] * blocks.xi[k];
    factor = build_lambda(scene, paths, gains, weights, theta, cfg);
  }

  info.location_dim = static_cast<int>(jac.cols());
  Eigen::MatrixXcd stacked(jac.rows(), jac.cols() + factor.cols());
  stacked << jac, factor;
  info.fim = (stacked.adjoint() * stacked) / sigma2;
  return info;
}

FisherInfo expected_fim(const Scene& scene, const PathParams& paths,
                        const GainRealization& gains, const GainVariances& variances,
                        const BeamWeights& weights, const RisProfile& theta,
                        const SystemConfig& cfg, KappaHalf half, double sigma2) {
  FisherInfo info;
  info.half = half;
  info.sigma2 = sigma2;

  if (half == KappaHalf::kUeSide) {
    const UeSideDerivativeBlocks blocks =
        ue_side_derivative_blocks(scene, paths, gains, weights, theta, cfg);
    const int l2 = scene.n_paths_ris_ue();
    const int half_dim = static_cast<int>(blocks.through_mu[0].cols());
    const int gain_dim = static_cast<int>(blocks.through_mu.size());
    info.location_dim = half_dim;
    info.fim = Eigen::MatrixXcd::Zero(half_dim + gain_dim, half_dim + gain_dim);
    for (int n = 0; n < scene.n_bs(); ++n)
      for (int l = 0; l <= l2; ++l) {
        const int k = n * (l2 + 1) + l;
        info.fim.topLeftCorner(half_dim, half_dim) +=
            variances.h_var[n][l] *
            (blocks.through_mu[k].adjoint() * blocks.through_mu[k]);
      }
    const Eigen::MatrixXcd factor = build_gamma(scene, paths, gains, weights, theta, cfg);
    info.fim.bottomRightCorner(gain_dim, gain_dim) = factor.adjoint() * factor;
  } else {
    const BsSideDerivativeBlocks blocks =
        bs_side_derivative_blocks(scene, paths, gains, weights, theta, cfg);
    const int l1 = scene.n_paths_bs_ris();
    const int half_dim = static_cast<int>(blocks.xi[0].cols());
    const int gain_dim = static_cast<int>(blocks.xi.size());
    info.location_dim = half_dim;
    info.fim = Eigen::MatrixXcd::Zero(half_dim + gain_dim, half_dim + gain_dim);
    for (int n = 0; n < scene.n_bs(); ++n)
      for (int l = 0; l <= l1; ++l) {
        const int k = n * (l1 + 1) + l;
        info.fim.topLeftCorner(half_dim, half_dim) +=
            variances.g_var[n][l] * (blocks.xi[k].adjoint() * blocks.xi[k]);
      }
    const Eigen::MatrixXcd factor = build_lambda(scene, paths, gains, weights, theta, cfg);
    info.fim.bottomRightCorner(gain_dim, gain_dim) = factor.adjoint() * factor;
  }
  info.fim /= sigma2;
  return info;
}

namespace {

/// Eigen-decomposition inverse of a Hermitian matrix with the ridge floor:
/// when the condition number exceeds 1e12 (or the matrix is not positive
/// definite), eps = 1e-12 * trace / dim is added to every eigenvalue.
Eigen::MatrixXcd hermitian_inverse(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("hermitian_inverse: eigen decomposition failed");
  Eigen::VectorXd ev = eig.eigenvalues();
  const double emax = ev.cwiseAbs().maxCoeff();
  const double emin = ev.minCoeff();
  if (!(emin > 0.0) || emax / emin > 1e12) {
    const double eps = 1e-12 * m.real().trace() / static_cast<double>(m.rows());
    ev.array() += eps;
    if (ev.cwiseAbs().minCoeff() == 0.0)
      throw std::runtime_error(
          "hermitian_inverse: singular after ridge floor; increase the pilot "
          "or subcarrier count");
  }
  return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
         eig.eigenvectors().adjoint();
}

Eigen::MatrixXcd submatrix(const Eigen::MatrixXcd& m, const std::vector<int>& keep) {
  Eigen::MatrixXcd sub(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j) sub(i, j) = m(keep[i], keep[j]);
  return sub;
}

}  // namespace

Eigen::MatrixXcd masked_inverse(const Eigen::MatrixXcd& m, const std::vector<int>& keep,
                                int full_dim) {
  const Eigen::MatrixXcd inv = hermitian_inverse(submatrix(m, keep));
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(full_dim, full_dim);
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j) out(keep[i], keep[j]) = inv(i, j);
  return out;
}

double inverse_trace(const Eigen::MatrixXcd& m, const std::vector<int>& keep) {
  return hermitian_inverse(submatrix(m, keep)).real().trace();
}

CrlbValue crlb_total(const Scene& scene, const PathParams& paths, const GainRealization& gains,
                     const GainVariances& variances, const BeamWeights& weights,
                     const RisProfile& theta, const SystemConfig& cfg, double sigma2) {
  const FisherInfo ue = expected_fim(scene, paths, gains, variances, weights, theta, cfg,
                                     KappaHalf::kUeSide, sigma2);
  const FisherInfo bs = expected_fim(scene, paths, gains, variances, weights, theta, cfg,
                                     KappaHalf::kBsSide, sigma2);
  CrlbValue out;
  out.crlb1 = inverse_trace(ue.fim, fim_identifiable(ue, scene.n_bs(), scene.n_paths_ris_ue()));
  out.crlb2 = inverse_trace(bs.fim, fim_identifiable(bs, scene.n_bs(), scene.n_paths_bs_ris()));
  out.total = out.crlb1 + out.crlb2;
  return out;
}

double location_crlb_trace(const FisherInfo& info, int n_bs, int n_paths) {
  const std::vector<int> keep = fim_identifiable(info, n_bs, n_paths);
  const Eigen::MatrixXcd inv = hermitian_inverse(submatrix(info.fim, keep));
  double trace = 0.0;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i] < info.location_dim) trace += inv(i, i).real();
  return trace;
}

}  // namespace jlbo
