// SPDX-License-Identifier: MIT
/// @file location.hpp
/// @brief Successive-convex-approximation location estimation: damped
///        Gauss-Newton steps on each location half with Armijo backtracking,
///        alternated until the residual objective settles.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "jlbo/channel.hpp"
#include "jlbo/config.hpp"
#include "jlbo/geometry.hpp"
#include "jlbo/signal.hpp"

namespace jlbo {

/// One accepted (or stalled) iterate of the location search.
struct LocationIterate {
  LocationParams params;
  double objective = 0.0;  ///< squared residual norm against the observation.
  double step = 0.0;       ///< accepted Armijo step length.
  double direction_norm = 0.0;
  int iteration = 0;
  bool stalled = false;  ///< Armijo exhausted without decrease.
};

/// Everything a location step needs besides the parameters: observations,
/// probing state, gain estimates, and the base scene carrying the known
/// anchors.  Either the single-round fields (y, weights, theta) or `rounds`
/// describe the observations; when `rounds` is set and non-empty it wins and
/// the single-round fields are ignored.  All rounds probe the same channel
/// realization, so one gain vector explains every round and the per-round
/// factorizations stack into one linear system (a single round under-
/// determines the geometry at small pilot counts; the accumulated stack is
/// what pins it down).
struct LocationContext {
  const Eigen::VectorXcd* y = nullptr;
  const BeamWeights* weights = nullptr;
  const RisProfile* theta = nullptr;
  const std::vector<PilotRound>* rounds = nullptr;  ///< multi-round observations.
  const GainRealization* gains = nullptr;           ///< current gain estimates.
  const SystemConfig* cfg = nullptr;
  const Scene* base_scene = nullptr;  ///< known anchors + current other half.
};

/// Armijo-damped Gauss-Newton step on the (RIS position, UE orientation,
/// RIS-UE scatterers) half: direction is the minimum-norm solution of the
/// real-stacked linearized residual system, step length from backtracking on
/// the true objective. Padding coordinates never move.
LocationIterate sca_location_step_ue_side(const LocationIterate& iterate,
                                          const LocationContext& ctx);

/// Same step on the (UE position, RIS orientation, BS-RIS scatterers) half
/// against the BS-gain factorization.
LocationIterate sca_location_step_bs_side(const LocationIterate& iterate,
                                          const LocationContext& ctx);

/// Result of the alternating estimation loop.
struct LocationEstimate {
  LocationParams params;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
};

/// Alternates one UE-side and one BS-side step per iteration until the
/// relative objective change drops below cfg.location_tolerance or
/// cfg.max_location_iterations is reached.  Between iterations the proximal
/// weight and trust radius adapt: a stalled line search raises the damping
/// and halves the radius (then the iteration does not count as converged); a
/// pair of full-length accepted steps lowers the damping and doubles the
/// radius back toward its configured value.  `y` must be the stacked
/// observation matching ctx (ctx.y in single-round mode, the concatenated
/// round observations otherwise).
LocationEstimate estimate_location(const Eigen::VectorXcd& y, const LocationParams& init,
                                   const LocationContext& ctx);

}  // namespace jlbo
