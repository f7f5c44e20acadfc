// SPDX-License-Identifier: MIT
/// @file beamformer.cpp
/// @brief Bound-minimizing beamforming implementation.

#include "jlbo/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "jlbo/derivatives.hpp"

namespace jlbo {
namespace {

using std::complex;

/// Pre-squared, pre-conjugated regularized inverses of one half's expected
/// Fisher blocks, ready for the v^H conj(inv^2) v quadratic-form identity
/// tr(inv^2 conj(v) v^T) = v^H conj(inv^2) v. Padding rows/cols are zero, so
/// padded derivative columns never contribute.
struct HalfBound {
  Eigen::MatrixXcd loc_sq_conj;   ///< conj(B^2), location dim square.
  Eigen::MatrixXcd gain_sq_conj;  ///< conj(E^2), gain dim square.
  double trace = 0.0;             ///< tr(B) + tr(E): the half's bound value.
};

HalfBound half_bound(const FisherInfo& info, const std::vector<int>& loc_keep) {
  const int loc_dim = info.location_dim;
  const int gain_dim = static_cast<int>(info.fim.rows()) - loc_dim;
  const Eigen::MatrixXcd loc_inv =
      masked_inverse(info.fim.topLeftCorner(loc_dim, loc_dim), loc_keep, loc_dim);
  std::vector<int> gain_keep(gain_dim);
  std::iota(gain_keep.begin(), gain_keep.end(), 0);
  const Eigen::MatrixXcd gain_inv = masked_inverse(
      info.fim.bottomRightCorner(gain_dim, gain_dim), gain_keep, gain_dim);
  HalfBound hb;
  hb.loc_sq_conj = (loc_inv * loc_inv).conjugate();
  hb.gain_sq_conj = (gain_inv * gain_inv).conjugate();
  hb.trace = loc_inv.trace().real() + gain_inv.trace().real();
  return hb;
}

/// Adds one half's bound-tangent quadratic contributions of rows
/// (n, js, ., .) (w form) or (n, js, m, .) (theta form) to q: the
/// variance-weighted location-derivative terms against conj(B^2) and the
/// gain-factorization term against base station n's block of conj(E^2).
void accumulate_quadratic(Eigen::MatrixXcd& q, const LinearRowFactors& rows,
                          const HalfBound& hb, const Eigen::VectorXd& var, int n) {
  const int block = static_cast<int>(rows.factor_row.size());  // L + 1
  const int n_ue = static_cast<int>(rows.factor_row[0].size());
  const int beam_dim = static_cast<int>(q.rows());
  Eigen::MatrixXcd dg(block, beam_dim);
  for (int r = 0; r < n_ue; ++r) {
    for (int l = 0; l < block; ++l) {
      const Eigen::MatrixXcd& d = rows.deriv_rows[l][r];
      q.noalias() += var(l) * (d.adjoint() * hb.loc_sq_conj * d);
      dg.row(l) = rows.factor_row[l][r];
    }
    q.noalias() += dg.adjoint() *
                   hb.gain_sq_conj.block(n * block, n * block, block, block) * dg;
  }
}

/// Deterministic eigenvector gauge: rotate the global phase so the
/// largest-magnitude entry is real positive (ties to the lowest index).
Eigen::VectorXcd gauge_eigenvector(Eigen::VectorXcd v) {
  int arg_max = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > best) {
      best = mag;
      arg_max = i;
    }
  }
  if (best > 0.0) v *= std::conj(v(arg_max)) / best;
  return v;
}

/// Principal eigenvector of a Hermitian matrix under the deterministic gauge.
Eigen::VectorXcd principal_direction(const Eigen::MatrixXcd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q);
  return gauge_eigenvector(es.eigenvectors().col(q.rows() - 1));
}

/// Rotates the candidate so Re{cur^H cand} = |cand^H cur|, the alignment that
/// makes the eigen-direction a provable non-ascent direction of the negated
/// Rayleigh quotient.
void phase_align(Eigen::VectorXcd& cand, const Eigen::VectorXcd& cur) {
  const complex<double> beta = cand.dot(cur);
  const double mag = std::abs(beta);
  if (mag > 0.0) cand *= beta / mag;
}

double max_modulus_error(const RisProfile& theta) {
  double worst = 0.0;
  for (int i = 0; i < theta.size(); ++i)
    worst = std::max(worst, std::abs(std::abs(theta(i)) - 1.0));
  return worst;
}

}  // namespace

SurrogateW build_surrogate_w(const Scene& scene, const PathParams& paths,
                             const GainRealization& gains, const GainVariances& variances,
                             const BeamWeights& w_prev, const RisProfile& theta,
                             const SystemConfig& cfg, double sigma2) {
  const FisherInfo fim_ue = expected_fim(scene, paths, gains, variances, w_prev, theta, cfg,
                                         KappaHalf::kUeSide, sigma2);
  const FisherInfo fim_bs = expected_fim(scene, paths, gains, variances, w_prev, theta, cfg,
                                         KappaHalf::kBsSide, sigma2);
  const HalfBound ue = half_bound(fim_ue, kappa2_identifiable(cfg.n_bs, cfg.n_paths_ris_ue));
  const HalfBound bs = half_bound(fim_bs, kappa1_identifiable(cfg.n_bs, cfg.n_paths_bs_ris));

  SurrogateW s;
  s.constant = 2.0 * (ue.trace + bs.trace);
  s.q.resize(cfg.n_bs);
  for (int n = 0; n < cfg.n_bs; ++n) {
    s.q[n].resize(cfg.n_subcarriers_per_bs);
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(cfg.n_tx, cfg.n_tx);
      const LinearRowFactors fu = ue_side_w_factors(scene, paths, gains, theta, cfg, n, js);
      const LinearRowFactors fb = bs_side_w_factors(scene, paths, gains, theta, cfg, n, js);
      accumulate_quadratic(q, fu, ue, variances.h_var[n], n);
      accumulate_quadratic(q, fb, bs, variances.g_var[n], n);
      q /= sigma2;
      q = 0.5 * (q + q.adjoint()).eval();  // kill round-off skew
      s.q[n][js].assign(cfg.n_pilots, q);  // the quadratic is pilot-independent
    }
  }
  return s;
}

double surrogate_w_value(const SurrogateW& s, const BeamWeights& w) {
  double value = s.constant;
  for (std::size_t n = 0; n < w.size(); ++n)
    for (std::size_t js = 0; js < w[n].size(); ++js)
      for (std::size_t m = 0; m < w[n][js].size(); ++m) {
        const Eigen::VectorXcd& v = w[n][js][m];
        value -= v.dot(s.q[n][js][m] * v).real() / v.squaredNorm();
      }
  return value;
}

WUpdateResult update_w(const BeamWeights& w_prev, const SurrogateW& surrogate,
                       const LineSearchParams& ls) {
  WUpdateResult out;
  out.w = w_prev;
  out.surrogate_before = surrogate_w_value(surrogate, w_prev);
  out.max_descent_inner = -std::numeric_limits<double>::infinity();

  for (std::size_t n = 0; n < w_prev.size(); ++n)
    for (std::size_t js = 0; js < w_prev[n].size(); ++js)
      for (std::size_t m = 0; m < w_prev[n][js].size(); ++m) {
        const Eigen::MatrixXcd& q = surrogate.q[n][js][m];
        Eigen::VectorXcd cur = w_prev[n][js][m];
        Eigen::VectorXcd cand = principal_direction(q);
        phase_align(cand, cur);
        Eigen::VectorXcd d = cand - cur;

        const double nrm2 = cur.squaredNorm();
        const double rq = cur.dot(q * cur).real() / nrm2;
        const Eigen::VectorXcd grad = (-2.0 / nrm2) * (q * cur - rq * cur);
        double inner = grad.dot(d).real();
        if (inner > 0.0) {  // round-off ascent: stand still
          d.setZero();
          inner = 0.0;
        }
        out.max_descent_inner = std::max(out.max_descent_inner, inner);

        if (d.squaredNorm() > 0.0) {
          const auto value = [&q](const Eigen::VectorXcd& v) {
            return -v.dot(q * v).real() / v.squaredNorm();
          };
          const double f0 = value(cur);
          double step = ls.initial_step;
          for (int k = 0; k < ls.max_backtracks; ++k) {
            const Eigen::VectorXcd v = cur + step * d;
            if (value(v) <= f0 + ls.armijo_a * step * inner) {
              cur = v / v.norm();  // scale-invariant objective; restore unit power
              break;
            }
            step *= ls.shrink;
          }
        }
        out.w[n][js][m] = cur;
      }

  if (!std::isfinite(out.max_descent_inner)) out.max_descent_inner = 0.0;
  out.surrogate_after = surrogate_w_value(surrogate, out.w);
  return out;
}

SurrogateTheta build_surrogate_theta(const Scene& scene, const PathParams& paths,
                                     const GainRealization& gains,
                                     const GainVariances& variances, const BeamWeights& w,
                                     const RisProfile& theta_prev, const SystemConfig& cfg,
                                     double sigma2, double eta) {
  const FisherInfo fim_ue = expected_fim(scene, paths, gains, variances, w, theta_prev, cfg,
                                         KappaHalf::kUeSide, sigma2);
  const FisherInfo fim_bs = expected_fim(scene, paths, gains, variances, w, theta_prev, cfg,
                                         KappaHalf::kBsSide, sigma2);
  const HalfBound ue = half_bound(fim_ue, kappa2_identifiable(cfg.n_bs, cfg.n_paths_ris_ue));
  const HalfBound bs = half_bound(fim_bs, kappa1_identifiable(cfg.n_bs, cfg.n_paths_bs_ris));

  SurrogateTheta s;
  s.q = Eigen::MatrixXcd::Zero(cfg.n_ris, cfg.n_ris);
  s.constant = 2.0 * (ue.trace + bs.trace);
  s.anchor = theta_prev;
  s.penalty = eta;
  for (int n = 0; n < cfg.n_bs; ++n)
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js)
      for (int m = 0; m < cfg.n_pilots; ++m) {
        const LinearRowFactors fu =
            ue_side_theta_factors(scene, paths, gains, cfg, n, js, w[n][js][m]);
        const LinearRowFactors fb =
            bs_side_theta_factors(scene, paths, gains, cfg, n, js, w[n][js][m]);
        accumulate_quadratic(s.q, fu, ue, variances.h_var[n], n);
        accumulate_quadratic(s.q, fb, bs, variances.g_var[n], n);
      }
  s.q /= sigma2;
  s.q = 0.5 * (s.q + s.q.adjoint()).eval();
  return s;
}

double surrogate_theta_value(const SurrogateTheta& s, const RisProfile& theta) {
  const double n_ris = static_cast<double>(s.q.rows());
  double value = s.constant - n_ris * theta.dot(s.q * theta).real() / theta.squaredNorm();
  value -= s.penalty * s.anchor.dot(theta - s.anchor).real();
  return value;
}

ThetaUpdateResult update_theta(const RisProfile& theta_prev, const SurrogateTheta& surrogate,
                               const LineSearchParams& ls) {
  const int dim = static_cast<int>(surrogate.q.rows());
  const double target_norm = std::sqrt(static_cast<double>(dim));

  ThetaUpdateResult out;
  out.theta = theta_prev;
  out.surrogate_before = surrogate_theta_value(surrogate, theta_prev);

  Eigen::VectorXcd cand = principal_direction(surrogate.q) * target_norm;
  phase_align(cand, theta_prev);
  Eigen::VectorXcd d = cand - theta_prev;

  const double nrm2 = theta_prev.squaredNorm();
  const double rq = theta_prev.dot(surrogate.q * theta_prev).real() / nrm2;
  const Eigen::VectorXcd grad =
      (-2.0 * dim / nrm2) * (surrogate.q * theta_prev - rq * theta_prev) -
      surrogate.penalty * surrogate.anchor;
  double inner = grad.dot(d).real();
  if (inner > 0.0) {  // penalty can reverse the eigen-direction: stand still
    d.setZero();
    inner = 0.0;
  }
  out.descent_inner = inner;

  if (d.squaredNorm() > 0.0) {
    const double f0 = out.surrogate_before;
    double step = ls.initial_step;
    for (int k = 0; k < ls.max_backtracks; ++k) {
      const RisProfile v = theta_prev + step * d;
      const double fv = surrogate_theta_value(surrogate, v);
      if (fv <= f0 + ls.armijo_a * step * inner) {
        // Restoring the feasible-set norm cannot hurt the Rayleigh part and
        // generically helps the penalty; keep it only when it does not
        // increase the surrogate, so acceptance stays monotone.
        const RisProfile renorm = v * (target_norm / v.norm());
        out.theta = (surrogate_theta_value(surrogate, renorm) <= fv) ? renorm : v;
        break;
      }
      step *= ls.shrink;
    }
  }
  out.surrogate_after = surrogate_theta_value(surrogate, out.theta);
  out.modulus_residual = max_modulus_error(out.theta);
  return out;
}

BeamformerResult optimize_beams(const Scene& scene, const PathParams& paths,
                                const GainRealization& gains, const GainVariances& variances,
                                const BeamWeights& w0, const RisProfile& theta0,
                                const SystemConfig& cfg, double sigma2) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("optimize_beams: noise variance must be positive");

  const LineSearchParams ls;
  const double closure = 1e-9;  // accepted steps may not raise the bound past this
  BeamWeights w = w0;
  RisProfile theta = theta0;

  BeamformerResult out;
  double crlb_cur = crlb_total(scene, paths, gains, variances, w, theta, cfg, sigma2).total;
  out.crlb_before = crlb_cur;
  out.crlb_history.push_back(crlb_cur);
  out.max_descent_inner = -std::numeric_limits<double>::infinity();

  double eta0 = 10.0 * std::abs(crlb_cur);
  if (eta0 == 0.0) eta0 = 1.0;
  const double eta_cap = std::ldexp(eta0, 30);
  double eta = eta0;

  for (int round = 0; round < cfg.beamformer_rounds; ++round) {
    const SurrogateW sw = build_surrogate_w(scene, paths, gains, variances, w, theta, cfg, sigma2);
    const WUpdateResult wr = update_w(w, sw, ls);
    out.max_descent_inner = std::max(out.max_descent_inner, wr.max_descent_inner);
    const double crlb_w = crlb_total(scene, paths, gains, variances, wr.w, theta, cfg, sigma2).total;
    if (crlb_w <= crlb_cur + closure) {
      w = wr.w;
      crlb_cur = crlb_w;
    }

    const SurrogateTheta st =
        build_surrogate_theta(scene, paths, gains, variances, w, theta, cfg, sigma2, eta);
    const ThetaUpdateResult tr = update_theta(theta, st, ls);
    out.max_descent_inner = std::max(out.max_descent_inner, tr.descent_inner);
    const double crlb_t =
        crlb_total(scene, paths, gains, variances, w, tr.theta, cfg, sigma2).total;
    if (crlb_t <= crlb_cur + closure) {
      theta = tr.theta;
      crlb_cur = crlb_t;
    }

    if (max_modulus_error(theta) >= 1e-3) eta = std::min(2.0 * eta, eta_cap);
    out.crlb_history.push_back(crlb_cur);
  }

  if (!std::isfinite(out.max_descent_inner)) out.max_descent_inner = 0.0;
  out.modulus_residual = max_modulus_error(theta);
  for (int i = 0; i < theta.size(); ++i) {
    const double mag = std::abs(theta(i));
    theta(i) = (mag == 0.0) ? std::complex<double>(1.0, 0.0) : theta(i) / mag;
  }
  out.max_modulus_error_final = max_modulus_error(theta);
  out.w = w;
  out.theta = theta;
  out.crlb_after = crlb_total(scene, paths, gains, variances, w, theta, cfg, sigma2).total;
  return out;
}

}  // namespace jlbo
