// SPDX-License-Identifier: MIT
/// @file derivatives.hpp
/// @brief Analytic first-order derivatives of the stacked observation model
///        with respect to the two location-parameter halves: geometry
///        partials, per-path log-derivative vectors, per-path column
///        derivative blocks, and the assembled estimation Jacobians.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "jlbo/channel.hpp"
#include "jlbo/config.hpp"
#include "jlbo/geometry.hpp"
#include "jlbo/signal.hpp"

namespace jlbo {

/// Partial derivatives of one BS-RIS path's (delay, departure angle, arrival
/// angle) with respect to the RIS position, the path's own scatterer, and
/// the RIS orientation. The direct path has zero scatterer partials.
struct BsRisPartials {
  Eigen::Vector2d dtoa_db = Eigen::Vector2d::Zero();
  Eigen::Vector2d dtoa_dr = Eigen::Vector2d::Zero();
  Eigen::Vector2d daod_db = Eigen::Vector2d::Zero();  ///< BS departure angle.
  Eigen::Vector2d daod_dr = Eigen::Vector2d::Zero();
  Eigen::Vector2d daoa_db = Eigen::Vector2d::Zero();  ///< RIS arrival angle.
  Eigen::Vector2d daoa_dr = Eigen::Vector2d::Zero();
  double daoa_dvarphi = -1.0;
};

/// Partial derivatives of one RIS-UE path's (delay, departure angle, arrival
/// angle) with respect to the RIS position, the UE position, the path's own
/// scatterer, and the two orientations.
struct RisUePartials {
  Eigen::Vector2d dtoa_db = Eigen::Vector2d::Zero();
  Eigen::Vector2d dtoa_dx = Eigen::Vector2d::Zero();
  Eigen::Vector2d dtoa_du = Eigen::Vector2d::Zero();
  Eigen::Vector2d daod_db = Eigen::Vector2d::Zero();  ///< RIS departure angle.
  Eigen::Vector2d daod_dx = Eigen::Vector2d::Zero();
  Eigen::Vector2d daod_du = Eigen::Vector2d::Zero();
  Eigen::Vector2d daoa_db = Eigen::Vector2d::Zero();  ///< UE arrival angle.
  Eigen::Vector2d daoa_dx = Eigen::Vector2d::Zero();
  Eigen::Vector2d daoa_du = Eigen::Vector2d::Zero();
  double daod_dvarphi = -1.0;
  double daoa_domega = -1.0;
};

/// Geometry partials of BS-RIS path l1 (0 = direct) of base station n.
BsRisPartials bs_ris_partials(const Scene& scene, int n, int l1);

/// Geometry partials of RIS-UE path l2 (0 = direct) of base station n.
RisUePartials ris_ue_partials(const Scene& scene, int n, int l2);

/// Log-derivatives of one path's per-row factorization entry with respect to
/// the location half that the leg's cascade term carries: the derivative of
/// log of the factorization entry (holding the other leg's channel matrices
/// fixed) with respect to position, orientation, and the path's own
/// scatterer coordinates.
struct DerivativeVectors {
  Eigen::Vector2cd position;            ///< RIS position (UE side) or UE position (BS side).
  std::complex<double> orientation;     ///< UE orientation (UE side) or RIS orientation (BS side).
  Eigen::Vector2cd scatterer;           ///< Own scatterer; zero for the direct path.
  std::complex<double> value;           ///< The factorization entry itself.
};

/// Derivative vectors of RIS-UE path l2's entry in row (n, js, m, r): the
/// entry is the cascade product of that path against the transmit beam
/// through the RIS, and the vectors are d log(entry) / d(b, omega, u_l2).
DerivativeVectors ue_side_derivative_vectors(const Scene& scene, const PathParams& paths,
                                             const GainRealization& gains,
                                             const BeamWeights& weights, const RisProfile& theta,
                                             const SystemConfig& cfg, int n, int l2, int js,
                                             int m, int r);

/// Derivative vectors of BS-RIS path l1's entry in row (n, js, m, r):
/// d log(entry) / d(x, varphi, r_l1). The UE-position and RIS-orientation
/// dependence flows through the receive-side cascade (including the RIS-UE
/// channel matrix rebuilt from the scene).
DerivativeVectors bs_side_derivative_vectors(const Scene& scene, const PathParams& paths,
                                             const GainRealization& gains,
                                             const BeamWeights& weights, const RisProfile& theta,
                                             const SystemConfig& cfg, int n, int l1, int js,
                                             int m, int r);

/// Per-path derivative blocks of the RIS-UE-gain factorization. Column
/// k = n*(L2+1)+l2 of the factorization has derivative through_mu[k] +
/// through_channel[k] with respect to the (RIS position, UE orientation,
/// RIS-UE scatterers) half; through_mu varies the cascade term only, and
/// through_channel carries the BS-RIS channel matrices' dependence on the
/// RIS position (their only live coordinates in this half).
struct UeSideDerivativeBlocks {
  std::vector<Eigen::MatrixXcd> through_mu;       ///< [k]: stack rows x half dim.
  std::vector<Eigen::MatrixXcd> through_channel;  ///< [k]: stack rows x half dim.
};

/// Per-path derivative blocks of the BS-RIS-gain factorization with respect
/// to the (UE position, RIS orientation, BS-RIS scatterers) half. Every live
/// coordinate flows through the receive-side cascade, so a single block per
/// column is exact.
struct BsSideDerivativeBlocks {
  std::vector<Eigen::MatrixXcd> xi;  ///< [k]: stack rows x half dim.
};

UeSideDerivativeBlocks ue_side_derivative_blocks(const Scene& scene, const PathParams& paths,
                                                 const GainRealization& gains,
                                                 const BeamWeights& weights,
                                                 const RisProfile& theta,
                                                 const SystemConfig& cfg);

BsSideDerivativeBlocks bs_side_derivative_blocks(const Scene& scene, const PathParams& paths,
                                                 const GainRealization& gains,
                                                 const BeamWeights& weights,
                                                 const RisProfile& theta,
                                                 const SystemConfig& cfg);

/// Row-vector factorizations of the factorization entries and their
/// through-cascade derivatives as linear forms in one transmit beam
/// (entry = row . w, fixed (bs, slot)) or in the RIS profile
/// (entry = row . theta, fixed (bs, slot, pilot)). The beamformer assembles
/// its surrogate quadratics from these; consistency with the entry and
/// block builders above is covered by tests.
struct LinearRowFactors {
  /// factor_row[l][r]: coefficient row of the gain-factorization entry of
  /// path l at UE antenna r.
  std::vector<std::vector<Eigen::RowVectorXcd>> factor_row;
  /// deriv_rows[l][r]: coefficient rows (half dim x beam dim) of the
  /// through-cascade location-derivative entries.
  std::vector<std::vector<Eigen::MatrixXcd>> deriv_rows;
};

/// Entries of rows (n, js, ., .) as linear forms in w_n[js, m].
LinearRowFactors ue_side_w_factors(const Scene& scene, const PathParams& paths,
                                   const GainRealization& gains, const RisProfile& theta,
                                   const SystemConfig& cfg, int n, int js);
LinearRowFactors bs_side_w_factors(const Scene& scene, const PathParams& paths,
                                   const GainRealization& gains, const RisProfile& theta,
                                   const SystemConfig& cfg, int n, int js);

/// Entries of rows (n, js, m, .) as linear forms in the RIS profile.
LinearRowFactors ue_side_theta_factors(const Scene& scene, const PathParams& paths,
                                       const GainRealization& gains, const SystemConfig& cfg,
                                       int n, int js, const Eigen::VectorXcd& w);
LinearRowFactors bs_side_theta_factors(const Scene& scene, const PathParams& paths,
                                       const GainRealization& gains, const SystemConfig& cfg,
                                       int n, int js, const Eigen::VectorXcd& w);

/// Jacobian of (Gamma(kappa_half) h) with respect to the (RIS position, UE
/// orientation, RIS-UE scatterers) half, stack rows by half dimension.
/// Pad-slot columns of absent path blocks are zero.
Eigen::MatrixXcd jacobian_gamma_h(const Scene& scene, const PathParams& paths,
                                  const GainRealization& gains, const BeamWeights& weights,
                                  const RisProfile& theta, const SystemConfig& cfg,
                                  const Eigen::VectorXcd& h_stacked);

/// Jacobian of (Lambda(kappa_half) g) with respect to the (UE position, RIS
/// orientation, BS-RIS scatterers) half.
Eigen::MatrixXcd jacobian_lambda_g(const Scene& scene, const PathParams& paths,
                                   const GainRealization& gains, const BeamWeights& weights,
                                   const RisProfile& theta, const SystemConfig& cfg,
                                   const Eigen::VectorXcd& g_stacked);

}  // namespace jlbo
