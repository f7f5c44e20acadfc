// SPDX-License-Identifier: MIT
/// @file signal.hpp
/// @brief Pilot bookkeeping and the stacked observation model: beam weights,
///        RIS phase profiles, the noiseless received stack, and the two
///        structured linear factorizations of it in the path gains.
#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "jlbo/channel.hpp"
#include "jlbo/config.hpp"
#include "jlbo/geometry.hpp"
#include "jlbo/rng.hpp"

namespace jlbo {

/// Transmit beam weights indexed [bs][subcarrier slot][pilot], each an
/// n_tx-dimensional unit-norm-bounded vector.
using BeamWeights = std::vector<std::vector<std::vector<Eigen::VectorXcd>>>;

/// One unit-modulus RIS phase profile shared by all pilots of a slot.
using RisProfile = Eigen::VectorXcd;

/// Draws unit-norm beam weights uniformly on the complex sphere.
BeamWeights random_beam_weights(const SystemConfig& cfg, Rng& rng);

/// Draws a unit-modulus RIS profile with phases uniform on (-pi, pi].
RisProfile random_ris_profile(const SystemConfig& cfg, Rng& rng);

/// Number of scalar observations in the stack: N * N_S * M * N_U.
int stack_dimension(const SystemConfig& cfg);

/// Row index of observation (n, js, m, r) in the stacked vector, with n the
/// 0-based base station, js the 0-based slot into its subcarrier schedule,
/// m the 0-based pilot, and r the 0-based UE antenna. Rows nest in exactly
/// that order, base station outermost.
int stack_row(const SystemConfig& cfg, int n, int js, int m, int r);

/// Visits every stack row in storage order; the callback receives
/// (row, n, js, j_global, m, r).
void for_each_stack_row(const SystemConfig& cfg,
                        const std::function<void(int, int, int, int, int, int)>& fn);

/// Noiseless received stack: row (n, js, m, r) holds
/// [H_n Theta G_n w_n[js, m]]_r on that base station's js-th subcarrier.
Eigen::VectorXcd noiseless_stack(const Scene& scene, const PathParams& paths,
                                 const GainRealization& gains, const BeamWeights& weights,
                                 const RisProfile& theta, const SystemConfig& cfg);

/// Adds CN(0, sigma2) noise entrywise.
Eigen::VectorXcd add_noise(const Eigen::VectorXcd& clean, double sigma2, Rng& rng);

/// Cascade vector of the RIS-UE path l2 at UE antenna r:
/// mu = sqrt(N_R N_U) exp(-i Omega_j toa2) [a_ue]_r conj(a_ris_tx),
/// an n_ris-dimensional column. The observation row is mu^T (Theta G w) h.
Eigen::VectorXcd mu_vector(const PathParams& paths, const SystemConfig& cfg, int n, int j,
                           int l2, int r);

/// Linear factor of the stack in the RIS-UE gains: y = Gamma h_stacked for
/// the scene that generated toa/angle tables. Column n*(L2+1)+l2 pairs with
/// h[n][l2]; rows follow stack_row order. Channel matrices G_n are rebuilt
/// from the scene, so Gamma depends on the RIS-side geometry and the BS-RIS
/// gains.
Eigen::MatrixXcd build_gamma(const Scene& scene, const PathParams& paths,
                             const GainRealization& gains, const BeamWeights& weights,
                             const RisProfile& theta, const SystemConfig& cfg);

/// Linear factor of the stack in the BS-RIS gains: y = Lambda g_stacked.
/// Column n*(L1+1)+l1 pairs with g[n][l1]. Channel matrices H_n are rebuilt
/// from the scene, so Lambda depends on the UE-side geometry and the RIS-UE
/// gains.
Eigen::MatrixXcd build_lambda(const Scene& scene, const PathParams& paths,
                              const GainRealization& gains, const BeamWeights& weights,
                              const RisProfile& theta, const SystemConfig& cfg);

/// Linear factor of the stack in the per-path gain products: y = B p with
/// p[(n(L1+1)+l1)(L2+1)+l2] = g[n][l1] h[n][l2]. The bilinear model is linear
/// in these products, so B depends on the geometry and probing state only —
/// no gain estimate enters. Fitting p by least squares concentrates both
/// gain vectors out of the residual at once, which scores a candidate
/// geometry by what no gain choice can explain.
Eigen::MatrixXcd build_product_basis(const Scene& scene, const PathParams& paths,
                                     const BeamWeights& weights, const RisProfile& theta,
                                     const SystemConfig& cfg);

/// One pilot round kept for joint processing: a received stack together with
/// the beams and RIS profile that produced it. All rounds of a run probe the
/// same quasi-static channel realization, so their factorizations share one
/// gain vector and stack row-wise into a single taller linear system.
struct PilotRound {
  Eigen::VectorXcd y;
  BeamWeights weights;
  RisProfile theta;
};

/// Observations of all rounds stacked in round order.
Eigen::VectorXcd stacked_observation(const std::vector<PilotRound>& rounds);

/// build_gamma of every round stacked row-wise (columns still pair with the
/// shared h_stacked).
Eigen::MatrixXcd build_gamma_stacked(const Scene& scene, const PathParams& paths,
                                     const GainRealization& gains,
                                     const std::vector<PilotRound>& rounds,
                                     const SystemConfig& cfg);

/// build_lambda of every round stacked row-wise (columns pair with the shared
/// g_stacked).
Eigen::MatrixXcd build_lambda_stacked(const Scene& scene, const PathParams& paths,
                                      const GainRealization& gains,
                                      const std::vector<PilotRound>& rounds,
                                      const SystemConfig& cfg);

/// build_product_basis of every round stacked row-wise (columns pair with
/// the shared gain products).
Eigen::MatrixXcd build_product_basis_stacked(const Scene& scene, const PathParams& paths,
                                             const std::vector<PilotRound>& rounds,
                                             const SystemConfig& cfg);

}  // namespace jlbo
