// SPDX-License-Identifier: MIT
/// @file driver.hpp
/// @brief Block-coordinate-descent orchestration of one joint localization
///        and beamforming run: alternating gain estimation, beam design, and
///        location estimation against a fixed or re-probed observation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jlbo/beamformer.hpp"
#include "jlbo/channel.hpp"
#include "jlbo/config.hpp"
#include "jlbo/fim.hpp"
#include "jlbo/geometry.hpp"
#include "jlbo/signal.hpp"

namespace jlbo {

/// Measured assumption checks gating a run.
struct AssumptionReport {
  bool dimension_ok = false;  ///< stack dim >= unknown count, both halves.
  bool rank_ok = false;       ///< probe Jacobian full rank on identifiable columns.
  int stack_dim = 0;
  int unknowns_ue_side = 0;
  int unknowns_bs_side = 0;
  double probe_rank_ratio = 0.0;  ///< smallest/largest kept singular value.
  std::vector<std::string> notes;

  bool ok() const { return dimension_ok && rank_ok; }
};

/// Checks the pilot-dimension inequality arithmetically and the Jacobian
/// rank numerically on a probe instance at the initial parameters.
AssumptionReport validate_assumptions(const Scene& init_scene, const GainRealization& gains,
                                      const BeamWeights& weights, const RisProfile& theta,
                                      const SystemConfig& cfg);

/// Beam handling per outer iteration.
enum class BeamPolicy {
  kOptimize,  ///< bound-minimizing transmit weights and RIS profile.
  kRandom,    ///< fresh random feasible beams each iteration (baseline).
  kFixedRis,  ///< RIS profile frozen at its initial value; weights optimized.
  kFrozen,    ///< both kept at their initial values (observations mode).
};

/// Per-outer-iteration snapshot of the run.
struct OuterIterate {
  int iteration = 0;
  double residual = 0.0;  ///< squared LS residual of the UE-side fit.
  double crlb_total = 0.0;
  double nmse_position = 0.0;  ///< against truth when known, else 0.
  double nmse_kappa = 0.0;
};

/// Final state and history of one run.
struct JlboState {
  LocationParams kappa;
  GainRealization gains;
  BeamWeights w;
  RisProfile theta;
  bool converged = false;
  int iterations = 0;
  std::vector<OuterIterate> history;
};

/// Ground truth handle: enables fresh probes after beam updates and
/// NMSE-vs-truth tracking.
struct SimulatorTruth {
  Scene scene;
  GainRealization gains;
};

/// Runs the alternating loop: per outer iteration (1) UE-side gains by least
/// squares, (2) BS-side gains by least squares, (3) beam update per policy
/// followed by a fresh probe when truth is available, (4) location
/// estimation warm-started at the current estimate. Stops when the relative
/// change of the UE-side residual drops below cfg.outer_tolerance or at
/// cfg.max_outer_iterations.
///
/// Without `truth` the fixed observation y0 is used throughout and the beam
/// policy degrades to kFrozen. `rng` drives probe noise and random-baseline
/// beam draws.
JlboState run_jlbo(const Eigen::VectorXcd& y0, const Scene& init_scene,
                   const GainRealization& init_gains, const BeamWeights& w0,
                   const RisProfile& theta0, const GainVariances& variances,
                   const SystemConfig& cfg, double sigma2,
                   const std::optional<SimulatorTruth>& truth, BeamPolicy policy, Rng& rng);

}  // namespace jlbo
