// SPDX-License-Identifier: MIT
/// @file location.cpp
#include "jlbo/location.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "jlbo/derivatives.hpp"
#include "jlbo/estimator.hpp"

namespace jlbo {

namespace {

constexpr double kArmijoA = 1e-4;
constexpr double kArmijoShrink = 0.5;
constexpr int kArmijoMaxBacktracks = 30;

// Adaptation range of the proximal weight between iterations; the trust
// radius never shrinks below kRadiusFloor so a step always remains possible.
constexpr double kDampingGrow = 10.0;
constexpr double kDampingShrink = 1.0 / 3.0;
constexpr double kDampingCeil = 1e2;
constexpr double kRadiusFloor = 1e-3;

void scatter_h(GainRealization& gains, const Eigen::VectorXcd& h_stacked) {
  int k = 0;
  for (auto& hn : gains.h)
    for (int l = 0; l < hn.size(); ++l) hn(l) = h_stacked(k++);
}

void scatter_g(GainRealization& gains, const Eigen::VectorXcd& g_stacked) {
  int k = 0;
  for (auto& gn : gains.g)
    for (int l = 0; l < gn.size(); ++l) gn(l) = g_stacked(k++);
}

/// The observation rounds a context describes: the explicit list when given,
/// otherwise the single-round fields wrapped as one round.
std::vector<PilotRound> context_rounds(const LocationContext& ctx) {
  if (ctx.rounds != nullptr && !ctx.rounds->empty()) return *ctx.rounds;
  std::vector<PilotRound> single;
  single.push_back(PilotRound{*ctx.y, *ctx.weights, *ctx.theta});
  return single;
}

/// jacobian_gamma_h of every round stacked row-wise, matching
/// build_gamma_stacked's row order.
Eigen::MatrixXcd jacobian_gamma_h_stacked(const Scene& scene, const PathParams& paths,
                                          const GainRealization& gains,
                                          const std::vector<PilotRound>& rounds,
                                          const SystemConfig& cfg,
                                          const Eigen::VectorXcd& h) {
  const Eigen::Index rows = stack_dimension(cfg);
  Eigen::MatrixXcd jac;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    const Eigen::MatrixXcd block =
        jacobian_gamma_h(scene, paths, gains, rounds[t].weights, rounds[t].theta, cfg, h);
    if (t == 0) jac.resize(rows * static_cast<Eigen::Index>(rounds.size()), block.cols());
    jac.middleRows(static_cast<Eigen::Index>(t) * rows, rows) = block;
  }
  return jac;
}

Eigen::MatrixXcd jacobian_lambda_g_stacked(const Scene& scene, const PathParams& paths,
                                           const GainRealization& gains,
                                           const std::vector<PilotRound>& rounds,
                                           const SystemConfig& cfg,
                                           const Eigen::VectorXcd& g) {
  const Eigen::Index rows = stack_dimension(cfg);
  Eigen::MatrixXcd jac;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    const Eigen::MatrixXcd block =
        jacobian_lambda_g(scene, paths, gains, rounds[t].weights, rounds[t].theta, cfg, g);
    if (t == 0) jac.resize(rows * static_cast<Eigen::Index>(rounds.size()), block.cols());
    jac.middleRows(static_cast<Eigen::Index>(t) * rows, rows) = block;
  }
  return jac;
}

/// Residual of the gain-product fit at the given geometry over the stacked
/// rounds: everything no choice of gain products can explain.  Concentrating
/// both gain vectors at once keeps the scored landscape a function of the
/// geometry alone; a single-side refit instead scores against the other
/// side's stale fit, and its displaced minima make the alternation wander.
Eigen::VectorXcd concentrated_residual(const Scene& scene, const PathParams& paths,
                                       const LocationContext& ctx,
                                       const std::vector<PilotRound>& rounds,
                                       const Eigen::VectorXcd& y_all) {
  const Eigen::MatrixXcd basis = build_product_basis_stacked(scene, paths, rounds, *ctx.cfg);
  return y_all - basis * least_squares_gains(basis, y_all);
}

/// Squared residual scored at the given parameters.  With gain refitting the
/// score is the concentrated residual above (identical for both halves);
/// otherwise it is the fixed-gain fit of the requested half.
double ue_side_objective(const LocationParams& params, const LocationContext& ctx,
                         const std::vector<PilotRound>& rounds,
                         const Eigen::VectorXcd& y_all) {
  const Scene scene = unpack_kappa(params, *ctx.base_scene);
  const PathParams paths = path_params(scene);
  if (ctx.cfg->location_gain_refit)
    return concentrated_residual(scene, paths, ctx, rounds, y_all).squaredNorm();
  const Eigen::MatrixXcd gamma = build_gamma_stacked(scene, paths, *ctx.gains, rounds, *ctx.cfg);
  return (y_all - gamma * ctx.gains->h_stacked()).squaredNorm();
}

double bs_side_objective(const LocationParams& params, const LocationContext& ctx,
                         const std::vector<PilotRound>& rounds,
                         const Eigen::VectorXcd& y_all) {
  const Scene scene = unpack_kappa(params, *ctx.base_scene);
  const PathParams paths = path_params(scene);
  if (ctx.cfg->location_gain_refit)
    return concentrated_residual(scene, paths, ctx, rounds, y_all).squaredNorm();
  const Eigen::MatrixXcd lambda =
      build_lambda_stacked(scene, paths, *ctx.gains, rounds, *ctx.cfg);
  return (y_all - lambda * ctx.gains->g_stacked()).squaredNorm();
}

/// Removes from each Jacobian column its component inside the factor
/// matrix's column space.  The gain fit can cancel exactly that component,
/// so only the projected remainder predicts how the refit residual moves.
Eigen::MatrixXcd project_off_gain_space(const Eigen::MatrixXcd& factor,
                                        const Eigen::MatrixXcd& jac) {
  return jac - factor * factor.completeOrthogonalDecomposition().solve(jac);
}

/// Damped Gauss-Newton direction from a complex residual system, solved over
/// the real stacking [Re; Im].  The convex model around the iterate is
/// |res - J d|^2 + mu |d|^2 with mu = damping * smax^2, so directions the data
/// barely observes (weak scattered paths) stay proportionally small instead of
/// absorbing huge minimum-norm moves; damping 0 falls back to a minimum-norm
/// solve with relative cutoff 1e-10.  Zero columns (padding slots) always
/// yield zero direction entries.  A positive trust_radius rescales any longer
/// direction onto the radius, which bounds how far one accepted step can move
/// the geometry (delay aliasing puts spurious basins a few meters out).
Eigen::VectorXd gauss_newton_direction(const Eigen::MatrixXcd& jac,
                                       const Eigen::VectorXcd& residual, double damping,
                                       bool precondition, double trust_radius) {
  const int rows = static_cast<int>(jac.rows());
  const int cols = static_cast<int>(jac.cols());
  Eigen::MatrixXd jac_r(2 * rows, cols);
  jac_r.topRows(rows) = jac.real();
  jac_r.bottomRows(rows) = jac.imag();
  Eigen::VectorXd res_r(2 * rows);
  res_r.head(rows) = residual.real();
  res_r.tail(rows) = residual.imag();

  Eigen::VectorXd scale = Eigen::VectorXd::Ones(cols);
  if (precondition) {
    for (int i = 0; i < cols; ++i) {
      const double norm = jac_r.col(i).norm();
      if (norm > 0.0) {
        scale[i] = 1.0 / norm;
        jac_r.col(i) *= scale[i];
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac_r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd direction;
  if (damping > 0.0) {
    const Eigen::VectorXd& s = svd.singularValues();
    const double smax = s.size() > 0 ? s[0] : 0.0;
    const double mu = damping * smax * smax;
    const Eigen::VectorXd coeffs = svd.matrixU().transpose() * res_r;
    Eigen::VectorXd filtered = Eigen::VectorXd::Zero(s.size());
    for (int i = 0; i < s.size(); ++i) {
      const double denom = s[i] * s[i] + mu;
      if (denom > 0.0) filtered[i] = s[i] * coeffs[i] / denom;
    }
    direction = svd.matrixV() * filtered;
  } else {
    svd.setThreshold(1e-10);
    direction = svd.solve(res_r);
  }
  if (precondition) direction = scale.asDiagonal() * direction;
  if (trust_radius > 0.0) {
    const double norm = direction.norm();
    if (norm > trust_radius) direction *= trust_radius / norm;
  }
  return direction;
}

/// One Armijo-damped Gauss-Newton step on one half.  apply/extract select
/// the half; objective evaluates the matching fit.
template <typename Objective, typename Extract, typename Apply>
LocationIterate damped_step(const LocationIterate& iterate, const LocationContext& ctx,
                            const Eigen::MatrixXcd& jac, const Eigen::VectorXcd& residual,
                            const Objective& objective, const Extract& extract,
                            const Apply& apply) {
  LocationIterate next = iterate;
  next.iteration = iterate.iteration + 1;

  const Eigen::VectorXd direction =
      gauss_newton_direction(jac, residual, ctx.cfg->location_damping,
                             ctx.cfg->diagonal_preconditioner, ctx.cfg->location_trust_radius);
  next.direction_norm = direction.norm();

  // f(kappa) = |y - F(kappa) gains|^2; grad^T direction = -2 |P res|^2 <= 0
  // with P the projector onto the Jacobian's column space.
  Eigen::VectorXd res_r(2 * residual.size());
  res_r.head(residual.size()) = residual.real();
  res_r.tail(residual.size()) = residual.imag();
  Eigen::MatrixXd jac_r(2 * residual.size(), jac.cols());
  jac_r.topRows(residual.size()) = jac.real();
  jac_r.bottomRows(residual.size()) = jac.imag();
  const double slope = -2.0 * res_r.dot(jac_r * direction);

  const double f0 = iterate.objective;
  const Eigen::VectorXd half0 = extract(iterate.params);
  double lambda = 1.0;
  for (int bt = 0; bt < kArmijoMaxBacktracks; ++bt) {
    LocationParams trial = iterate.params;
    apply(trial, half0 + lambda * direction);
    const double f_trial = objective(trial, ctx);
    if (f_trial <= f0 + kArmijoA * lambda * slope) {
      next.params = trial;
      next.objective = f_trial;
      next.step = lambda;
      next.stalled = false;
      return next;
    }
    lambda *= kArmijoShrink;
  }
  next.objective = f0;
  next.step = 0.0;
  next.stalled = true;
  return next;
}

LocationIterate ue_side_step(const LocationIterate& iterate, const LocationContext& ctx,
                             const std::vector<PilotRound>& rounds,
                             const Eigen::VectorXcd& y_all) {
  const Scene scene = unpack_kappa(iterate.params, *ctx.base_scene);
  const PathParams paths = path_params(scene);
  const Eigen::MatrixXcd gamma = build_gamma_stacked(scene, paths, *ctx.gains, rounds, *ctx.cfg);
  Eigen::VectorXcd h_fit = ctx.gains->h_stacked();
  Eigen::VectorXcd residual;
  if (ctx.cfg->location_gain_refit) {
    // Score and residual come from the gain-concentrated fit; the model
    // Jacobian is evaluated at the structured gains closest to it (current
    // BS-RIS gains, RIS-UE gains refit by least squares) and projected off
    // the concentrated fit's column space so the quadratic model matches the
    // concentrated objective.  The line search tests the true objective, so
    // the approximation only ever costs backtracks, never false descent.
    h_fit = least_squares_gains(gamma, y_all);
    residual = concentrated_residual(scene, paths, ctx, rounds, y_all);
  } else {
    residual = y_all - gamma * h_fit;
  }
  GainRealization gains_at_fit = *ctx.gains;
  scatter_h(gains_at_fit, h_fit);
  Eigen::MatrixXcd jac =
      jacobian_gamma_h_stacked(scene, paths, gains_at_fit, rounds, *ctx.cfg, h_fit);
  if (ctx.cfg->location_gain_refit)
    jac = project_off_gain_space(build_product_basis_stacked(scene, paths, rounds, *ctx.cfg),
                                 jac);
  LocationIterate seeded = iterate;
  seeded.objective = residual.squaredNorm();
  const auto objective = [&rounds, &y_all](const LocationParams& p, const LocationContext& c) {
    return ue_side_objective(p, c, rounds, y_all);
  };
  return damped_step(
      seeded, ctx, jac, residual, objective,
      [](const LocationParams& p) { return p.kappa2(); },
      [](LocationParams& p, const Eigen::VectorXd& half) { p.set_kappa2(half); });
}

LocationIterate bs_side_step(const LocationIterate& iterate, const LocationContext& ctx,
                             const std::vector<PilotRound>& rounds,
                             const Eigen::VectorXcd& y_all) {
  const Scene scene = unpack_kappa(iterate.params, *ctx.base_scene);
  const PathParams paths = path_params(scene);
  const Eigen::MatrixXcd lambda =
      build_lambda_stacked(scene, paths, *ctx.gains, rounds, *ctx.cfg);
  Eigen::VectorXcd g_fit = ctx.gains->g_stacked();
  Eigen::VectorXcd residual;
  if (ctx.cfg->location_gain_refit) {
    g_fit = least_squares_gains(lambda, y_all);
    residual = concentrated_residual(scene, paths, ctx, rounds, y_all);
  } else {
    residual = y_all - lambda * g_fit;
  }
  GainRealization gains_at_fit = *ctx.gains;
  scatter_g(gains_at_fit, g_fit);
  Eigen::MatrixXcd jac =
      jacobian_lambda_g_stacked(scene, paths, gains_at_fit, rounds, *ctx.cfg, g_fit);
  if (ctx.cfg->location_gain_refit)
    jac = project_off_gain_space(build_product_basis_stacked(scene, paths, rounds, *ctx.cfg),
                                 jac);
  LocationIterate seeded = iterate;
  seeded.objective = residual.squaredNorm();
  const auto objective = [&rounds, &y_all](const LocationParams& p, const LocationContext& c) {
    return bs_side_objective(p, c, rounds, y_all);
  };
  return damped_step(
      seeded, ctx, jac, residual, objective,
      [](const LocationParams& p) { return p.kappa1(); },
      [](LocationParams& p, const Eigen::VectorXd& half) { p.set_kappa1(half); });
}

}  // namespace

LocationIterate sca_location_step_ue_side(const LocationIterate& iterate,
                                          const LocationContext& ctx) {
  const std::vector<PilotRound> rounds = context_rounds(ctx);
  return ue_side_step(iterate, ctx, rounds, stacked_observation(rounds));
}

LocationIterate sca_location_step_bs_side(const LocationIterate& iterate,
                                          const LocationContext& ctx) {
  const std::vector<PilotRound> rounds = context_rounds(ctx);
  return bs_side_step(iterate, ctx, rounds, stacked_observation(rounds));
}

LocationEstimate estimate_location(const Eigen::VectorXcd& y, const LocationParams& init,
                                   const LocationContext& ctx) {
  std::vector<PilotRound> rounds;
  if (ctx.rounds != nullptr && !ctx.rounds->empty()) {
    rounds = *ctx.rounds;
  } else {
    rounds.push_back(PilotRound{ctx.y != nullptr ? *ctx.y : y, *ctx.weights, *ctx.theta});
  }
  const Eigen::VectorXcd y_all = stacked_observation(rounds);

  // With gain refitting, each accepted half-step re-estimates its gain block
  // at the new geometry so the other half always linearizes against current
  // fits; the caller's gain estimates are never modified.
  GainRealization work_gains = *ctx.gains;
  // The step config carries the between-iteration damping/radius adaptation;
  // the caller's config supplies the starting values and the shrink floor.
  SystemConfig step_cfg = *ctx.cfg;
  LocationContext local = ctx;
  local.gains = &work_gains;
  local.cfg = &step_cfg;
  local.rounds = &rounds;
  const auto refresh_gains = [&](const LocationParams& params) {
    if (!ctx.cfg->location_gain_refit) return;
    const Scene scene = unpack_kappa(params, *ctx.base_scene);
    const PathParams paths = path_params(scene);
    const Eigen::MatrixXcd gamma =
        build_gamma_stacked(scene, paths, work_gains, rounds, step_cfg);
    scatter_h(work_gains, least_squares_gains(gamma, y_all));
    const Eigen::MatrixXcd lambda =
        build_lambda_stacked(scene, paths, work_gains, rounds, step_cfg);
    scatter_g(work_gains, least_squares_gains(lambda, y_all));
  };
  refresh_gains(init);

  LocationEstimate out;
  LocationIterate iterate;
  iterate.params = init;
  iterate.objective = ue_side_objective(init, local, rounds, y_all);

  const double damping0 = ctx.cfg->location_damping;
  const double radius0 = ctx.cfg->location_trust_radius;
  double combined_prev = iterate.objective + bs_side_objective(init, local, rounds, y_all);
  for (int it = 0; it < ctx.cfg->max_location_iterations; ++it) {
    const LocationIterate after_ue = ue_side_step(iterate, local, rounds, y_all);
    refresh_gains(after_ue.params);
    const LocationIterate after_bs = bs_side_step(after_ue, local, rounds, y_all);
    refresh_gains(after_bs.params);
    iterate = after_bs;
    out.iterations = it + 1;

    // A stalled line search means the convex model overreached: raise the
    // proximal weight and pull in the trust radius, then try again.  Two
    // clean full-length accepts relax both back toward their configured
    // values (never below them, so the caller's damping floor holds).
    const bool any_stall = after_ue.stalled || after_bs.stalled;
    if (any_stall) {
      step_cfg.location_damping =
          std::min(kDampingCeil, std::max(step_cfg.location_damping * kDampingGrow, 1e-10));
      if (step_cfg.location_trust_radius > 0.0)
        step_cfg.location_trust_radius =
            std::max(step_cfg.location_trust_radius * 0.5, kRadiusFloor);
    } else if (after_ue.step == 1.0 && after_bs.step == 1.0) {
      step_cfg.location_damping = std::max(step_cfg.location_damping * kDampingShrink, damping0);
      if (radius0 > 0.0)
        step_cfg.location_trust_radius =
            std::min(step_cfg.location_trust_radius * 2.0, radius0);
    }

    const double combined = ue_side_objective(iterate.params, local, rounds, y_all) +
                            bs_side_objective(iterate.params, local, rounds, y_all);
    out.objective_history.push_back(combined);
    const double denom = std::max(combined_prev, 1e-300);
    const bool small_change =
        std::abs(combined_prev - combined) / denom < ctx.cfg->location_tolerance;
    if ((small_change && !any_stall) || combined == 0.0) {
      out.converged = true;
      combined_prev = combined;
      break;
    }
    combined_prev = combined;
    // Both knobs exhausted on a stalled iteration: no step can be produced.
    if (any_stall && step_cfg.location_damping >= kDampingCeil &&
        step_cfg.location_trust_radius <= kRadiusFloor)
      break;
  }
  out.params = iterate.params;
  out.objective = ue_side_objective(iterate.params, local, rounds, y_all);
  return out;
}

}  // namespace jlbo
