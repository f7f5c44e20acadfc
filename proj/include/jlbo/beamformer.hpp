// SPDX-License-Identifier: MIT
/// @file beamformer.hpp
/// @brief Bound-minimizing transmit and RIS beamforming: surrogate quadratic
///        forms tangent to the trace-CRLB objective, principal-eigenvector
///        directions with Armijo damping, and a penalty-driven unit-modulus
///        relaxation for the RIS phases.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "jlbo/channel.hpp"
#include "jlbo/config.hpp"
#include "jlbo/fim.hpp"
#include "jlbo/geometry.hpp"
#include "jlbo/signal.hpp"

namespace jlbo {

/// Armijo line-search constants shared by both beam updates.
struct LineSearchParams {
  double armijo_a = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  int max_backtracks = 30;
};

/// Surrogate quadratic for the transmit-weight update: one Hermitian PSD
/// matrix per (bs, slot, pilot) aggregating the four bound-tangent terms
/// (location and gain blocks of both halves). Maximizing w^H Q w per beam
/// under the unit power constraint minimizes the surrogate bound.
struct SurrogateW {
  std::vector<std::vector<std::vector<Eigen::MatrixXcd>>> q;  ///< [n][js][m], n_tx square.
  double constant = 0.0;  ///< Tangency offset; surrogate equals the bound at the expansion point.
};

/// Surrogate quadratic for the RIS-phase update: a single aggregated
/// Hermitian PSD matrix (the profile is shared by every row) plus the
/// penalty anchor and weight of the unit-modulus relaxation.
struct SurrogateTheta {
  Eigen::MatrixXcd q;  ///< n_ris square.
  Eigen::VectorXcd anchor;
  double penalty = 0.0;
  double constant = 0.0;  ///< Tangency offset; surrogate equals the bound at the expansion point.
};

/// Builds the transmit-weight surrogate at the current beams: the four FIM
/// blocks' regularized inverses are frozen at (w_prev, theta) and each
/// observation row contributes a rank-structured PSD term.
SurrogateW build_surrogate_w(const Scene& scene, const PathParams& paths,
                             const GainRealization& gains, const GainVariances& variances,
                             const BeamWeights& w_prev, const RisProfile& theta,
                             const SystemConfig& cfg, double sigma2);

/// Surrogate value -sum_{n,js,m} w^H Q w (lower is better).
double surrogate_w_value(const SurrogateW& s, const BeamWeights& w);

/// One damped eigen-step per beam: candidate = principal eigenvector,
/// Armijo along (candidate - current) on the per-beam Rayleigh quotient,
/// then projection onto the unit ball.
struct WUpdateResult {
  BeamWeights w;
  double surrogate_before = 0.0;
  double surrogate_after = 0.0;
  double max_descent_inner = 0.0;  ///< max over beams of Re{grad^H d} (<= 0 expected).
};

WUpdateResult update_w(const BeamWeights& w_prev, const SurrogateW& surrogate,
                       const LineSearchParams& ls);

/// Builds the RIS-phase surrogate at the current beams with penalty weight
/// eta anchored at theta_prev.
SurrogateTheta build_surrogate_theta(const Scene& scene, const PathParams& paths,
                                     const GainRealization& gains,
                                     const GainVariances& variances, const BeamWeights& w,
                                     const RisProfile& theta_prev, const SystemConfig& cfg,
                                     double sigma2, double eta);

/// Penalized surrogate value -theta^H Q theta / (theta^H theta) * n_ris
/// minus the linearized penalty (lower is better).
double surrogate_theta_value(const SurrogateTheta& s, const RisProfile& theta);

struct ThetaUpdateResult {
  RisProfile theta;
  double surrogate_before = 0.0;
  double surrogate_after = 0.0;
  double descent_inner = 0.0;  ///< Re{grad^H d} at the accepted direction.
  double modulus_residual = 0.0;  ///< max_i | |theta_i| - 1 | before projection.
};

ThetaUpdateResult update_theta(const RisProfile& theta_prev, const SurrogateTheta& surrogate,
                               const LineSearchParams& ls);

/// Full beamforming pass: alternates update_w then update_theta for
/// cfg.beamformer_rounds rounds with a doubling penalty schedule, accepts
/// theta steps only when the true bound does not increase, and hard-projects
/// the final profile to unit modulus.
struct BeamformerResult {
  BeamWeights w;
  RisProfile theta;
  double crlb_before = 0.0;
  double crlb_after = 0.0;
  std::vector<double> crlb_history;        ///< per accepted round.
  double max_descent_inner = 0.0;          ///< worst Re{grad^H d} seen (<= 0 expected).
  double modulus_residual = 0.0;           ///< before the final projection.
  double max_modulus_error_final = 0.0;    ///< after the final projection.
};

BeamformerResult optimize_beams(const Scene& scene, const PathParams& paths,
                                const GainRealization& gains, const GainVariances& variances,
                                const BeamWeights& w0, const RisProfile& theta0,
                                const SystemConfig& cfg, double sigma2);

}  // namespace jlbo
