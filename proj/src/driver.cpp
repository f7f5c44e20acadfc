// SPDX-License-Identifier: MIT
/// @file driver.cpp
/// @brief Alternating joint localization and beamforming loop.

#include "jlbo/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jlbo/derivatives.hpp"
#include "jlbo/estimator.hpp"
#include "jlbo/harness.hpp"
#include "jlbo/location.hpp"

namespace jlbo {
namespace {

/// Smallest/largest singular value of a Jacobian restricted to the kept
/// columns, after per-column normalization (normalization preserves rank and
/// removes the meter-vs-radian scale disparity between coordinates).
double column_rank_ratio(const Eigen::MatrixXcd& jac, const std::vector<int>& keep) {
  if (jac.rows() == 0 || keep.empty()) return 0.0;
  Eigen::MatrixXcd sub(jac.rows(), static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const Eigen::VectorXcd col = jac.col(keep[i]);
    const double norm = col.norm();
    sub.col(static_cast<int>(i)) = (norm > 0.0) ? (col / norm).eval() : col;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

/// Scatters a stacked gain vector back into the per-base-station layout.
void assign_stacked(std::vector<Eigen::VectorXcd>& per_bs, const Eigen::VectorXcd& stacked) {
  int offset = 0;
  for (auto& v : per_bs) {
    v = stacked.segment(offset, v.size());
    offset += static_cast<int>(v.size());
  }
}

/// Weight-only bound descent used by the fixed-RIS policy: the RIS profile
/// is left untouched and each round's weight step must close the true bound.
void optimize_w_only(const Scene& scene, const PathParams& paths, const GainRealization& gains,
                     const GainVariances& variances, BeamWeights& w, const RisProfile& theta,
                     const SystemConfig& cfg, double sigma2) {
  const LineSearchParams ls;
  double crlb_cur = crlb_total(scene, paths, gains, variances, w, theta, cfg, sigma2).total;
  for (int round = 0; round < cfg.beamformer_rounds; ++round) {
    const SurrogateW sw = build_surrogate_w(scene, paths, gains, variances, w, theta, cfg, sigma2);
    const WUpdateResult wr = update_w(w, sw, ls);
    const double crlb_w = crlb_total(scene, paths, gains, variances, wr.w, theta, cfg, sigma2).total;
    if (crlb_w <= crlb_cur + 1e-9) {
      w = wr.w;
      crlb_cur = crlb_w;
    }
  }
}

/// Whole-trace CRLB over the accumulated pilot rounds: information from
/// independent-noise rounds about the shared parameters adds, so each half's
/// expected FIM is the sum of its per-round FIMs.
CrlbValue crlb_total_rounds(const Scene& scene, const PathParams& paths,
                            const GainRealization& gains, const GainVariances& variances,
                            const std::vector<PilotRound>& rounds, const SystemConfig& cfg,
                            double sigma2) {
  FisherInfo ue = expected_fim(scene, paths, gains, variances, rounds.front().weights,
                               rounds.front().theta, cfg, KappaHalf::kUeSide, sigma2);
  FisherInfo bs = expected_fim(scene, paths, gains, variances, rounds.front().weights,
                               rounds.front().theta, cfg, KappaHalf::kBsSide, sigma2);
  for (std::size_t t = 1; t < rounds.size(); ++t) {
    ue.fim += expected_fim(scene, paths, gains, variances, rounds[t].weights, rounds[t].theta,
                           cfg, KappaHalf::kUeSide, sigma2)
                  .fim;
    bs.fim += expected_fim(scene, paths, gains, variances, rounds[t].weights, rounds[t].theta,
                           cfg, KappaHalf::kBsSide, sigma2)
                  .fim;
  }
  CrlbValue out;
  out.crlb1 = inverse_trace(ue.fim, fim_identifiable(ue, scene.n_bs(), scene.n_paths_ris_ue()));
  out.crlb2 = inverse_trace(bs.fim, fim_identifiable(bs, scene.n_bs(), scene.n_paths_bs_ris()));
  out.total = out.crlb1 + out.crlb2;
  return out;
}

/// NMSE over the identifiable kappa coordinates of two packed scenes.
double kappa_nmse(const Scene& estimate, const Scene& truth) {
  const LocationParams k_est = pack_kappa(estimate);
  const LocationParams k_true = pack_kappa(truth);
  const std::vector<int> keep = kappa_identifiable(k_true);
  Eigen::VectorXd est(static_cast<int>(keep.size()));
  Eigen::VectorXd ref(static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    est(static_cast<int>(i)) = k_est.kappa(keep[i]);
    ref(static_cast<int>(i)) = k_true.kappa(keep[i]);
  }
  return nmse(est, ref);
}

}  // namespace

AssumptionReport validate_assumptions(const Scene& init_scene, const GainRealization& gains,
                                      const BeamWeights& weights, const RisProfile& theta,
                                      const SystemConfig& cfg) {
  AssumptionReport rep;
  rep.stack_dim = stack_dimension(cfg);
  rep.unknowns_ue_side = 2 * cfg.n_bs * (cfg.n_paths_ris_ue + 1) + 3;
  rep.unknowns_bs_side = 2 * cfg.n_bs * (cfg.n_paths_bs_ris + 1) + 3;
  rep.dimension_ok =
      rep.stack_dim >= rep.unknowns_ue_side && rep.stack_dim >= rep.unknowns_bs_side;
  if (!rep.dimension_ok) {
    std::ostringstream os;
    os << "pilot stack dimension " << rep.stack_dim << " is below the unknown count ("
       << rep.unknowns_ue_side << " UE side, " << rep.unknowns_bs_side << " BS side)";
    rep.notes.push_back(os.str());
  }

  if (rep.stack_dim <= 0) {
    rep.rank_ok = false;
    rep.notes.push_back("empty pilot stack: no probe Jacobian to rank-check");
    return rep;
  }

  const PathParams paths = path_params(init_scene);
  const Eigen::MatrixXcd jac_ue =
      jacobian_gamma_h(init_scene, paths, gains, weights, theta, cfg, gains.h_stacked());
  const Eigen::MatrixXcd jac_bs =
      jacobian_lambda_g(init_scene, paths, gains, weights, theta, cfg, gains.g_stacked());
  const double ratio_ue =
      column_rank_ratio(jac_ue, kappa2_identifiable(cfg.n_bs, cfg.n_paths_ris_ue));
  const double ratio_bs =
      column_rank_ratio(jac_bs, kappa1_identifiable(cfg.n_bs, cfg.n_paths_bs_ris));
  rep.probe_rank_ratio = std::min(ratio_ue, ratio_bs);
  rep.rank_ok = rep.probe_rank_ratio > 1e-10;
  if (!rep.rank_ok) {
    std::ostringstream os;
    os << "probe Jacobian is rank-deficient on identifiable columns (singular value ratio "
       << rep.probe_rank_ratio << ")";
    rep.notes.push_back(os.str());
  }
  return rep;
}

JlboState run_jlbo(const Eigen::VectorXcd& y0, const Scene& init_scene,
                   const GainRealization& init_gains, const BeamWeights& w0,
                   const RisProfile& theta0, const GainVariances& variances,
                   const SystemConfig& cfg, double sigma2,
                   const std::optional<SimulatorTruth>& truth, BeamPolicy policy, Rng& rng) {
  Scene scene_hat = init_scene;
  GainRealization gains_hat = init_gains;
  BeamWeights w = w0;
  RisProfile theta = theta0;
  // Every probe within the run sees the same channel realization (one
  // quasi-static slot), so rounds are retained and processed jointly: a
  // single round under-determines the geometry at small pilot counts, and
  // the accumulated stack is what localizes.
  std::vector<PilotRound> rounds;
  rounds.push_back(PilotRound{y0, w0, theta0});
  const BeamPolicy pol = truth.has_value() ? policy : BeamPolicy::kFrozen;

  // The outer loop advances every block once per cycle, so the location block
  // gets a bounded number of SCA passes here instead of its standalone budget.
  // Candidate geometries are scored with their gains refit: the alternation
  // minimizes over gains and geometry jointly, and a fixed-gain step stalls
  // wherever the last gain fit has absorbed the remaining geometry error.
  SystemConfig loc_cfg = cfg;
  loc_cfg.max_location_iterations =
      std::min(cfg.max_location_iterations, std::max(1, cfg.location_steps_per_outer));
  loc_cfg.location_gain_refit = true;

  JlboState state;
  double prev_residual = std::numeric_limits<double>::infinity();

  for (int it = 0; it < cfg.max_outer_iterations; ++it) {
    PathParams paths_hat = path_params(scene_hat);
    const Eigen::VectorXcd y_all = stacked_observation(rounds);

    // (1) UE-side gains against the current geometry and BS-side gains,
    // shared across every accumulated round.
    const Eigen::MatrixXcd gamma =
        build_gamma_stacked(scene_hat, paths_hat, gains_hat, rounds, cfg);
    assign_stacked(gains_hat.h, least_squares_gains(gamma, y_all));

    // (2) BS-side gains against the refreshed UE-side gains.
    const Eigen::MatrixXcd lambda =
        build_lambda_stacked(scene_hat, paths_hat, gains_hat, rounds, cfg);
    assign_stacked(gains_hat.g, least_squares_gains(lambda, y_all));

    // (3) Location estimation warm-started at the current estimate. It sees
    // the same rounds and beams the gains were just fitted against, so the
    // residual it minimizes is the one reported below.  While the stack is a
    // single round and another probe is coming, the geometry is left alone:
    // one round barely over-determines the lifted unknowns, and a step taken
    // on it reliably walks into a gain-compensated wrong geometry that later
    // rounds then have to pull back from.
    const bool will_append =
        truth.has_value() &&
        (pol == BeamPolicy::kRandom ||
         ((pol == BeamPolicy::kOptimize || pol == BeamPolicy::kFixedRis) && sigma2 > 0.0));
    if (!(will_append && rounds.size() < 2)) {
      LocationContext ctx;
      ctx.rounds = &rounds;
      ctx.gains = &gains_hat;
      ctx.cfg = &loc_cfg;
      ctx.base_scene = &scene_hat;
      const LocationEstimate est = estimate_location(y_all, pack_kappa(scene_hat), ctx);
      scene_hat = unpack_kappa(est.params, scene_hat);
    }

    paths_hat = path_params(scene_hat);
    const Eigen::MatrixXcd gamma_post =
        build_gamma_stacked(scene_hat, paths_hat, gains_hat, rounds, cfg);
    // The stack grows across iterations, so the recorded residual and the
    // convergence metric are per unit observation energy to stay comparable
    // between iterations.
    const double y_energy = std::max(y_all.squaredNorm(), 1e-300);
    const double residual =
        (y_all - gamma_post * gains_hat.h_stacked()).squaredNorm() / y_energy;

    OuterIterate oi;
    oi.iteration = it + 1;
    oi.residual = residual;
    oi.crlb_total = (sigma2 > 0.0)
                        ? crlb_total_rounds(scene_hat, paths_hat, gains_hat, variances, rounds,
                                            cfg, sigma2)
                              .total
                        : 0.0;
    if (truth.has_value()) {
      oi.nmse_position = nmse(scene_hat.ue_position, truth->scene.ue_position);
      oi.nmse_kappa = kappa_nmse(scene_hat, truth->scene);
    }
    state.history.push_back(oi);
    state.iterations = it + 1;

    // Relative-change stop with an absolute floor for noiseless exact fits.
    if (residual <= 1e-24) {
      state.converged = true;
      break;
    }
    if (it > 0) {
      const double rel = std::abs(residual - prev_residual) /
                         std::max(prev_residual, std::numeric_limits<double>::min());
      if (rel < cfg.outer_tolerance) {
        state.converged = true;
        break;
      }
    }
    prev_residual = residual;
    if (it + 1 >= cfg.max_outer_iterations) break;

    // (4) Beam redesign at the refined estimate. The new beams take effect at
    // the next probe: the simulator re-transmits with them (same gains, fresh
    // noise at the same power) and the round joins the accumulated stack, so
    // the next iteration re-fits the gains before anything else consumes the
    // new observation. Estimation-only runs keep the round that produced the
    // observation.
    bool beams_changed = false;
    switch (pol) {
      case BeamPolicy::kOptimize:
        if (sigma2 > 0.0) {
          const BeamformerResult bf = optimize_beams(scene_hat, paths_hat, gains_hat,
                                                     variances, w, theta, cfg, sigma2);
          w = bf.w;
          theta = bf.theta;
          beams_changed = true;
        }
        break;
      case BeamPolicy::kRandom:
        w = random_beam_weights(cfg, rng);
        theta = random_ris_profile(cfg, rng);
        beams_changed = true;
        break;
      case BeamPolicy::kFixedRis:
        if (sigma2 > 0.0) {
          optimize_w_only(scene_hat, paths_hat, gains_hat, variances, w, theta, cfg, sigma2);
          beams_changed = true;
        }
        break;
      case BeamPolicy::kFrozen:
        break;
    }
    if (beams_changed && truth.has_value()) {
      const PathParams paths_true = path_params(truth->scene);
      const Eigen::VectorXcd clean =
          noiseless_stack(truth->scene, paths_true, truth->gains, w, theta, cfg);
      rounds.push_back(PilotRound{add_noise(clean, sigma2, rng), w, theta});
    }
  }

  state.kappa = pack_kappa(scene_hat);
  state.gains = gains_hat;
  state.w = w;
  state.theta = theta;
  return state;
}

}  // namespace jlbo
