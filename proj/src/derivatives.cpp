// SPDX-License-Identifier: MIT
/// @file derivatives.cpp
///
/// Derivative engine for the stacked observation model.  Each factorization
/// entry is a product of a delay phasor, steering-vector projections, and
/// (for the BS-RIS side) the receive cascade through the RIS-UE channel;
/// its derivative with respect to any location coordinate therefore splits
/// into a scalar log-derivative part plus an element-wise phase-slope part.
/// Everything here is assembled division-free so entries near zero stay
/// finite; only the log-derivative accessors divide by the entry value.
#include "jlbo/derivatives.hpp"

#include <cmath>

namespace jlbo {

using std::complex;

namespace {

constexpr complex<double> kI{0.0, 1.0};

}  // namespace

BsRisPartials bs_ris_partials(const Scene& scene, int n, int l1) {
  BsRisPartials p;
  const double c = scene.light_speed;
  const auto& a = scene.bs_positions[n];
  const auto& b = scene.ris_position;
  if (l1 == 0) {
    p.dtoa_db = (b - a) / (c * (b - a).norm());
    p.daod_db = planar_angle_gradient(b - a);
    p.daoa_db = planar_angle_gradient(b - a);
  } else {
    const auto& r = scene.bs_ris_scatterers[n][l1 - 1];
    p.dtoa_db = (b - r) / (c * (b - r).norm());
    p.dtoa_dr = ((r - a).normalized() + (r - b).normalized()) / c;
    p.daod_dr = planar_angle_gradient(r - a);
    p.daoa_db = planar_angle_gradient(b - r);
    p.daoa_dr = -p.daoa_db;
  }
  return p;
}

RisUePartials ris_ue_partials(const Scene& scene, int n, int l2) {
  RisUePartials p;
  const double c = scene.light_speed;
  const auto& b = scene.ris_position;
  const auto& x = scene.ue_position;
  if (l2 == 0) {
    p.dtoa_dx = (x - b) / (c * (x - b).norm());
    p.dtoa_db = -p.dtoa_dx;
    p.daod_dx = planar_angle_gradient(x - b);
    p.daod_db = -p.daod_dx;
    p.daoa_dx = planar_angle_gradient(x - b);
    p.daoa_db = -p.daoa_dx;
  } else {
    const auto& u = scene.ris_ue_scatterers[n][l2 - 1];
    p.dtoa_db = (b - u) / (c * (u - b).norm());
    p.dtoa_dx = (x - u) / (c * (x - u).norm());
    p.dtoa_du = ((u - b).normalized() + (u - x).normalized()) / c;
    p.daod_du = planar_angle_gradient(u - b);
    p.daod_db = -p.daod_du;
    p.daoa_dx = planar_angle_gradient(x - u);
    p.daoa_du = -p.daoa_dx;
  }
  return p;
}

namespace {

/// Shared per-(bs, subcarrier) precomputation for the UE-side derivatives.
struct UeSideLink {
  double omega = 0.0;
  Eigen::VectorXd alpha_ue;   ///< UE element phase slopes at this wavelength.
  ChannelPair ch;
  Eigen::MatrixXcd g_db[2];   ///< dG/d(ris position coordinate)
  struct Path {
    RisUePartials partials;
    complex<double> coef;     ///< sqrt(N_R N_U) exp(-i omega toa)
    Eigen::VectorXcd a_ue;
    Eigen::VectorXcd a_ris;   ///< RIS-departure steering vector
    Eigen::VectorXcd a_ris_alpha;  ///< entrywise a_ris * phase slopes
    double cos_aoa = 0.0;     ///< cos of the UE arrival angle
    double cos_aod = 0.0;     ///< cos of the RIS departure angle
  };
  std::vector<Path> path;
};

UeSideLink make_ue_side_link(const Scene& scene, const PathParams& paths,
                             const GainRealization& gains, const SystemConfig& cfg, int n,
                             int j) {
  UeSideLink link;
  const double lambda = subcarrier_wavelength(j, cfg);
  const double spacing = half_wavelength_spacing(cfg);
  const double pf = cfg.steering_phase_factor;
  link.omega = angular_frequency(j, cfg);
  link.alpha_ue = steering_phase_slopes(cfg.n_ue, spacing, lambda, pf);
  link.ch = assemble_channels(scene, paths, gains, cfg, n, j);

  // dG/db: every BS-RIS path's delay, RIS-arrival and (direct path only)
  // BS-departure angles move with the RIS position.
  const double g_scale = std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_ris);
  link.g_db[0] = Eigen::MatrixXcd::Zero(cfg.n_ris, cfg.n_tx);
  link.g_db[1] = Eigen::MatrixXcd::Zero(cfg.n_ris, cfg.n_tx);
  for (int l = 0; l <= scene.n_paths_bs_ris(); ++l) {
    const BsRisPartials gp = bs_ris_partials(scene, n, l);
    const Eigen::VectorXcd a_rx =
        steering_vector(paths.aoa_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    const Eigen::VectorXcd da_rx =
        steering_vector_derivative(paths.aoa_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    const Eigen::VectorXcd a_tx =
        steering_vector(paths.aod_bs[n][l], cfg.n_tx, spacing, lambda, pf);
    const Eigen::VectorXcd da_tx =
        steering_vector_derivative(paths.aod_bs[n][l], cfg.n_tx, spacing, lambda, pf);
    const complex<double> coef =
        g_scale * gains.g[n][l] *
        std::exp(complex<double>(0.0, -link.omega * paths.toa_bs_ris[n][l]));
    for (int i = 0; i < 2; ++i) {
      link.g_db[i].noalias() +=
          coef * (-kI * link.omega * gp.dtoa_db[i]) * a_rx * a_tx.adjoint();
      link.g_db[i].noalias() += coef * gp.daoa_db[i] * da_rx * a_tx.adjoint();
      link.g_db[i].noalias() += coef * gp.daod_db[i] * a_rx * da_tx.adjoint();
    }
  }

  for (int l = 0; l <= scene.n_paths_ris_ue(); ++l) {
    UeSideLink::Path p;
    p.partials = ris_ue_partials(scene, n, l);
    p.coef = std::sqrt(static_cast<double>(cfg.n_ris) * cfg.n_ue) *
             std::exp(complex<double>(0.0, -link.omega * paths.toa_ris_ue[n][l]));
    p.a_ue = steering_vector(paths.aoa_ue[n][l], cfg.n_ue, spacing, lambda, pf);
    p.a_ris = steering_vector(paths.aod_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    const Eigen::VectorXd alpha_ris =
        steering_phase_slopes(cfg.n_ris, spacing, lambda, pf);
    p.a_ris_alpha = p.a_ris.cwiseProduct(alpha_ris.cast<complex<double>>());
    p.cos_aoa = std::cos(paths.aoa_ue[n][l]);
    p.cos_aod = std::cos(paths.aod_ris[n][l]);
    link.path.push_back(std::move(p));
  }
  return link;
}

/// Per-coordinate factor pair of d(entry)/d(coord) = entry_plain * s +
/// entry_alpha * t, where entry_plain and entry_alpha are the cascade
/// projections of the path's RIS-departure vector and its slope-weighted
/// copy.  s carries the delay phasor and UE-arrival phase, t the
/// RIS-departure phase.
struct ScalarPair {
  complex<double> s{0.0, 0.0};
  complex<double> t{0.0, 0.0};
};

ScalarPair ue_side_pair(const UeSideLink& link, const UeSideLink::Path& p, int r,
                        double dtoa, double daoa, double daod) {
  ScalarPair out;
  out.s = -kI * link.omega * dtoa - kI * link.alpha_ue[r] * p.cos_aoa * daoa;
  out.t = kI * p.cos_aod * daod;
  return out;
}

/// Shared per-(bs, subcarrier) precomputation for the BS-side derivatives.
struct BsSideLink {
  double omega = 0.0;
  Eigen::MatrixXcd h_mat;     ///< RIS-UE channel matrix
  Eigen::MatrixXcd h_dx[2];   ///< dH/d(ue position coordinate)
  Eigen::MatrixXcd h_dphi;    ///< dH/d(ris orientation)
  Eigen::MatrixXcd recv;      ///< H Theta
  Eigen::MatrixXcd recv_dx[2];  ///< (dH/d ue position) Theta
  Eigen::MatrixXcd recv_dphi;   ///< (dH/d ris orientation) Theta
  struct Path {
    BsRisPartials partials;
    complex<double> coef;     ///< sqrt(N_T N_R) exp(-i omega toa)
    Eigen::VectorXcd a_tx;
    Eigen::VectorXcd da_tx;
    Eigen::VectorXcd a_ris;   ///< RIS-arrival steering vector
    Eigen::VectorXcd da_ris;
    Eigen::VectorXcd v;       ///< recv * a_ris(arrival), per UE antenna
    Eigen::VectorXcd vd;      ///< recv * da_ris
    Eigen::VectorXcd vx[2];   ///< recv_dx * a_ris
    Eigen::VectorXcd vphi;    ///< recv_dphi * a_ris
  };
  std::vector<Path> path;
};

BsSideLink make_bs_side_link(const Scene& scene, const PathParams& paths,
                             const GainRealization& gains, const RisProfile& theta,
                             const SystemConfig& cfg, int n, int j) {
  BsSideLink link;
  const double lambda = subcarrier_wavelength(j, cfg);
  const double spacing = half_wavelength_spacing(cfg);
  const double pf = cfg.steering_phase_factor;
  link.omega = angular_frequency(j, cfg);

  const ChannelPair ch = assemble_channels(scene, paths, gains, cfg, n, j);
  link.recv = ch.h_mat * theta.asDiagonal();

  // dH/d(ue position) and dH/d(ris orientation): every RIS-UE path's delay
  // and angles move with the UE position; the RIS-departure angle moves
  // one-for-one with the RIS orientation.
  const double h_scale = std::sqrt(static_cast<double>(cfg.n_ris) * cfg.n_ue);
  Eigen::MatrixXcd h_dx[2] = {Eigen::MatrixXcd::Zero(cfg.n_ue, cfg.n_ris),
                              Eigen::MatrixXcd::Zero(cfg.n_ue, cfg.n_ris)};
  Eigen::MatrixXcd h_dphi = Eigen::MatrixXcd::Zero(cfg.n_ue, cfg.n_ris);
  for (int l = 0; l <= scene.n_paths_ris_ue(); ++l) {
    const RisUePartials hp = ris_ue_partials(scene, n, l);
    const Eigen::VectorXcd a_rx =
        steering_vector(paths.aoa_ue[n][l], cfg.n_ue, spacing, lambda, pf);
    const Eigen::VectorXcd da_rx =
        steering_vector_derivative(paths.aoa_ue[n][l], cfg.n_ue, spacing, lambda, pf);
    const Eigen::VectorXcd a_tx =
        steering_vector(paths.aod_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    const Eigen::VectorXcd da_tx =
        steering_vector_derivative(paths.aod_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    const complex<double> coef =
        h_scale * gains.h[n][l] *
        std::exp(complex<double>(0.0, -link.omega * paths.toa_ris_ue[n][l]));
    for (int i = 0; i < 2; ++i) {
      h_dx[i].noalias() += coef * (-kI * link.omega * hp.dtoa_dx[i]) * a_rx * a_tx.adjoint();
      h_dx[i].noalias() += coef * hp.daoa_dx[i] * da_rx * a_tx.adjoint();
      h_dx[i].noalias() += coef * hp.daod_dx[i] * a_rx * da_tx.adjoint();
    }
    h_dphi.noalias() += coef * hp.daod_dvarphi * a_rx * da_tx.adjoint();
  }
  link.h_mat = ch.h_mat;
  link.h_dx[0] = h_dx[0];
  link.h_dx[1] = h_dx[1];
  link.h_dphi = h_dphi;
  link.recv_dx[0] = h_dx[0] * theta.asDiagonal();
  link.recv_dx[1] = h_dx[1] * theta.asDiagonal();
  link.recv_dphi = h_dphi * theta.asDiagonal();

  const double scale = std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_ris);
  for (int l = 0; l <= scene.n_paths_bs_ris(); ++l) {
    BsSideLink::Path p;
    p.partials = bs_ris_partials(scene, n, l);
    p.coef = scale * std::exp(complex<double>(0.0, -link.omega * paths.toa_bs_ris[n][l]));
    p.a_tx = steering_vector(paths.aod_bs[n][l], cfg.n_tx, spacing, lambda, pf);
    p.da_tx = steering_vector_derivative(paths.aod_bs[n][l], cfg.n_tx, spacing, lambda, pf);
    p.a_ris = steering_vector(paths.aoa_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    p.da_ris = steering_vector_derivative(paths.aoa_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    p.v = link.recv * p.a_ris;
    p.vd = link.recv * p.da_ris;
    p.vx[0] = link.recv_dx[0] * p.a_ris;
    p.vx[1] = link.recv_dx[1] * p.a_ris;
    p.vphi = link.recv_dphi * p.a_ris;
    link.path.push_back(std::move(p));
  }
  return link;
}

}  // namespace

UeSideDerivativeBlocks ue_side_derivative_blocks(const Scene& scene, const PathParams& paths,
                                                 const GainRealization& gains,
                                                 const BeamWeights& weights,
                                                 const RisProfile& theta,
                                                 const SystemConfig& cfg) {
  const int n_bs = scene.n_bs();
  const int l2 = scene.n_paths_ris_ue();
  const int rows = stack_dimension(cfg);
  const int half_dim = 3 + 2 * n_bs * (l2 + 1);

  UeSideDerivativeBlocks out;
  out.through_mu.assign(n_bs * (l2 + 1), Eigen::MatrixXcd::Zero(rows, half_dim));
  out.through_channel.assign(n_bs * (l2 + 1), Eigen::MatrixXcd::Zero(rows, half_dim));

  for (int n = 0; n < n_bs; ++n) {
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      const int j = (n + 1) + js * cfg.n_bs;
      const UeSideLink link = make_ue_side_link(scene, paths, gains, cfg, n, j);
      for (int m = 0; m < cfg.n_pilots; ++m) {
        const Eigen::VectorXcd& w = weights[n][js][m];
        const Eigen::VectorXcd bvec = theta.asDiagonal() * (link.ch.g_mat * w);
        const Eigen::VectorXcd bvec_db[2] = {theta.asDiagonal() * (link.g_db[0] * w),
                                             theta.asDiagonal() * (link.g_db[1] * w)};
        for (int l = 0; l <= l2; ++l) {
          const auto& p = link.path[l];
          const complex<double> dot_plain = p.a_ris.dot(bvec);
          const complex<double> dot_alpha = p.a_ris_alpha.dot(bvec);
          const complex<double> dot_db[2] = {p.a_ris.dot(bvec_db[0]),
                                             p.a_ris.dot(bvec_db[1])};
          const int k = n * (l2 + 1) + l;
          for (int r = 0; r < cfg.n_ue; ++r) {
            const int row = stack_row(cfg, n, js, m, r);
            const complex<double> front = p.coef * p.a_ue[r];
            auto& mu_blk = out.through_mu[k];
            for (int i = 0; i < 2; ++i) {
              const ScalarPair sp = ue_side_pair(link, p, r, p.partials.dtoa_db[i],
                                                 p.partials.daoa_db[i], p.partials.daod_db[i]);
              mu_blk(row, i) = front * (sp.s * dot_plain + sp.t * dot_alpha);
              out.through_channel[k](row, i) = front * dot_db[i];
            }
            {
              const ScalarPair sp =
                  ue_side_pair(link, p, r, 0.0, p.partials.daoa_domega, 0.0);
              mu_blk(row, 2) = front * sp.s * dot_plain;
            }
            if (l >= 1) {
              const int col = 3 + LocationParams::block_slot(l, n, n_bs);
              for (int i = 0; i < 2; ++i) {
                const ScalarPair sp =
                    ue_side_pair(link, p, r, p.partials.dtoa_du[i], p.partials.daoa_du[i],
                                 p.partials.daod_du[i]);
                mu_blk(row, col + i) = front * (sp.s * dot_plain + sp.t * dot_alpha);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

BsSideDerivativeBlocks bs_side_derivative_blocks(const Scene& scene, const PathParams& paths,
                                                 const GainRealization& gains,
                                                 const BeamWeights& weights,
                                                 const RisProfile& theta,
                                                 const SystemConfig& cfg) {
  const int n_bs = scene.n_bs();
  const int l1 = scene.n_paths_bs_ris();
  const int rows = stack_dimension(cfg);
  const int half_dim = 3 + 2 * n_bs * (l1 + 1);

  BsSideDerivativeBlocks out;
  out.xi.assign(n_bs * (l1 + 1), Eigen::MatrixXcd::Zero(rows, half_dim));

  for (int n = 0; n < n_bs; ++n) {
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      const int j = (n + 1) + js * cfg.n_bs;
      const BsSideLink link = make_bs_side_link(scene, paths, gains, theta, cfg, n, j);
      for (int m = 0; m < cfg.n_pilots; ++m) {
        const Eigen::VectorXcd& w = weights[n][js][m];
        for (int l = 0; l <= l1; ++l) {
          const auto& p = link.path[l];
          const complex<double> aw = p.a_tx.dot(w);
          const complex<double> daw = p.da_tx.dot(w);
          const int k = n * (l1 + 1) + l;
          for (int r = 0; r < cfg.n_ue; ++r) {
            const int row = stack_row(cfg, n, js, m, r);
            auto& blk = out.xi[k];
            for (int i = 0; i < 2; ++i) blk(row, i) = p.coef * aw * p.vx[i][r];
            blk(row, 2) =
                p.coef * aw * (p.partials.daoa_dvarphi * p.vd[r] + p.vphi[r]);
            if (l >= 1) {
              const int col = 3 + LocationParams::block_slot(l, n, n_bs);
              for (int i = 0; i < 2; ++i)
                blk(row, col + i) =
                    p.coef * (-kI * link.omega * p.partials.dtoa_dr[i] * aw * p.v[r] +
                              p.partials.daod_dr[i] * daw * p.v[r] +
                              p.partials.daoa_dr[i] * aw * p.vd[r]);
            }
          }
        }
      }
    }
  }
  return out;
}

LinearRowFactors ue_side_w_factors(const Scene& scene, const PathParams& paths,
                                   const GainRealization& gains, const RisProfile& theta,
                                   const SystemConfig& cfg, int n, int js) {
  const int j = (n + 1) + js * cfg.n_bs;
  const UeSideLink link = make_ue_side_link(scene, paths, gains, cfg, n, j);
  const int n_bs = scene.n_bs();
  const int l2 = scene.n_paths_ris_ue();
  const int half_dim = 3 + 2 * n_bs * (l2 + 1);

  LinearRowFactors out;
  out.factor_row.resize(l2 + 1);
  out.deriv_rows.resize(l2 + 1);
  for (int l = 0; l <= l2; ++l) {
    const auto& p = link.path[l];
    const Eigen::RowVectorXcd row_plain =
        p.a_ris.adjoint() * theta.asDiagonal() * link.ch.g_mat;
    const Eigen::RowVectorXcd row_alpha =
        p.a_ris_alpha.adjoint() * theta.asDiagonal() * link.ch.g_mat;
    out.factor_row[l].resize(cfg.n_ue);
    out.deriv_rows[l].assign(cfg.n_ue, Eigen::MatrixXcd::Zero(half_dim, cfg.n_tx));
    for (int r = 0; r < cfg.n_ue; ++r) {
      const complex<double> front = p.coef * p.a_ue[r];
      out.factor_row[l][r] = front * row_plain;
      auto& d = out.deriv_rows[l][r];
      for (int i = 0; i < 2; ++i) {
        const ScalarPair sp = ue_side_pair(link, p, r, p.partials.dtoa_db[i],
                                           p.partials.daoa_db[i], p.partials.daod_db[i]);
        d.row(i) = front * (sp.s * row_plain + sp.t * row_alpha);
      }
      d.row(2) = front * (-kI * link.alpha_ue[r] * p.cos_aoa * p.partials.daoa_domega) *
                 row_plain;
      if (l >= 1) {
        const int col = 3 + LocationParams::block_slot(l, n, n_bs);
        for (int i = 0; i < 2; ++i) {
          const ScalarPair sp = ue_side_pair(link, p, r, p.partials.dtoa_du[i],
                                             p.partials.daoa_du[i], p.partials.daod_du[i]);
          d.row(col + i) = front * (sp.s * row_plain + sp.t * row_alpha);
        }
      }
    }
  }
  return out;
}

LinearRowFactors bs_side_w_factors(const Scene& scene, const PathParams& paths,
                                   const GainRealization& gains, const RisProfile& theta,
                                   const SystemConfig& cfg, int n, int js) {
  const int j = (n + 1) + js * cfg.n_bs;
  const BsSideLink link = make_bs_side_link(scene, paths, gains, theta, cfg, n, j);
  const int n_bs = scene.n_bs();
  const int l1 = scene.n_paths_bs_ris();
  const int half_dim = 3 + 2 * n_bs * (l1 + 1);

  LinearRowFactors out;
  out.factor_row.resize(l1 + 1);
  out.deriv_rows.resize(l1 + 1);
  for (int l = 0; l <= l1; ++l) {
    const auto& p = link.path[l];
    const Eigen::RowVectorXcd atx_h = p.a_tx.adjoint();
    const Eigen::RowVectorXcd datx_h = p.da_tx.adjoint();
    out.factor_row[l].resize(cfg.n_ue);
    out.deriv_rows[l].assign(cfg.n_ue, Eigen::MatrixXcd::Zero(half_dim, cfg.n_tx));
    for (int r = 0; r < cfg.n_ue; ++r) {
      out.factor_row[l][r] = p.coef * p.v[r] * atx_h;
      auto& d = out.deriv_rows[l][r];
      for (int i = 0; i < 2; ++i) d.row(i) = p.coef * p.vx[i][r] * atx_h;
      d.row(2) = p.coef * (p.partials.daoa_dvarphi * p.vd[r] + p.vphi[r]) * atx_h;
      if (l >= 1) {
        const int col = 3 + LocationParams::block_slot(l, n, n_bs);
        for (int i = 0; i < 2; ++i)
          d.row(col + i) =
              p.coef * (-kI * link.omega * p.partials.dtoa_dr[i] * p.v[r] * atx_h +
                        p.partials.daod_dr[i] * p.v[r] * datx_h +
                        p.partials.daoa_dr[i] * p.vd[r] * atx_h);
      }
    }
  }
  return out;
}

LinearRowFactors ue_side_theta_factors(const Scene& scene, const PathParams& paths,
                                       const GainRealization& gains, const SystemConfig& cfg,
                                       int n, int js, const Eigen::VectorXcd& w) {
  const int j = (n + 1) + js * cfg.n_bs;
  const UeSideLink link = make_ue_side_link(scene, paths, gains, cfg, n, j);
  const int n_bs = scene.n_bs();
  const int l2 = scene.n_paths_ris_ue();
  const int half_dim = 3 + 2 * n_bs * (l2 + 1);
  const Eigen::VectorXcd gw = link.ch.g_mat * w;

  LinearRowFactors out;
  out.factor_row.resize(l2 + 1);
  out.deriv_rows.resize(l2 + 1);
  for (int l = 0; l <= l2; ++l) {
    const auto& p = link.path[l];
    const Eigen::RowVectorXcd row_plain =
        p.a_ris.conjugate().cwiseProduct(gw).transpose();
    const Eigen::RowVectorXcd row_alpha =
        p.a_ris_alpha.conjugate().cwiseProduct(gw).transpose();
    out.factor_row[l].resize(cfg.n_ue);
    out.deriv_rows[l].assign(cfg.n_ue, Eigen::MatrixXcd::Zero(half_dim, cfg.n_ris));
    for (int r = 0; r < cfg.n_ue; ++r) {
      const complex<double> front = p.coef * p.a_ue[r];
      out.factor_row[l][r] = front * row_plain;
      auto& d = out.deriv_rows[l][r];
      for (int i = 0; i < 2; ++i) {
        const ScalarPair sp = ue_side_pair(link, p, r, p.partials.dtoa_db[i],
                                           p.partials.daoa_db[i], p.partials.daod_db[i]);
        d.row(i) = front * (sp.s * row_plain + sp.t * row_alpha);
      }
      d.row(2) = front * (-kI * link.alpha_ue[r] * p.cos_aoa * p.partials.daoa_domega) *
                 row_plain;
      if (l >= 1) {
        const int col = 3 + LocationParams::block_slot(l, n, n_bs);
        for (int i = 0; i < 2; ++i) {
          const ScalarPair sp = ue_side_pair(link, p, r, p.partials.dtoa_du[i],
                                             p.partials.daoa_du[i], p.partials.daod_du[i]);
          d.row(col + i) = front * (sp.s * row_plain + sp.t * row_alpha);
        }
      }
    }
  }
  return out;
}

LinearRowFactors bs_side_theta_factors(const Scene& scene, const PathParams& paths,
                                       const GainRealization& gains, const SystemConfig& cfg,
                                       int n, int js, const Eigen::VectorXcd& w) {
  const int j = (n + 1) + js * cfg.n_bs;
  // The RIS profile argument only shapes the Theta-weighted caches, which
  // this builder does not read; raw channel matrices are used instead.
  const RisProfile unit = RisProfile::Ones(cfg.n_ris);
  const BsSideLink link = make_bs_side_link(scene, paths, gains, unit, cfg, n, j);
  const int n_bs = scene.n_bs();
  const int l1 = scene.n_paths_bs_ris();
  const int half_dim = 3 + 2 * n_bs * (l1 + 1);

  // Theta-coefficient row of [A diag(theta) vec]_r.
  const auto hrow = [&](const Eigen::MatrixXcd& a, const Eigen::VectorXcd& vec,
                        int r) -> Eigen::RowVectorXcd {
    return a.row(r).transpose().cwiseProduct(vec).transpose();
  };

  LinearRowFactors out;
  out.factor_row.resize(l1 + 1);
  out.deriv_rows.resize(l1 + 1);
  for (int l = 0; l <= l1; ++l) {
    const auto& p = link.path[l];
    const complex<double> aw = p.a_tx.dot(w);
    const complex<double> daw = p.da_tx.dot(w);
    out.factor_row[l].resize(cfg.n_ue);
    out.deriv_rows[l].assign(cfg.n_ue, Eigen::MatrixXcd::Zero(half_dim, cfg.n_ris));
    for (int r = 0; r < cfg.n_ue; ++r) {
      const Eigen::RowVectorXcd base = hrow(link.h_mat, p.a_ris, r);
      const Eigen::RowVectorXcd base_d = hrow(link.h_mat, p.da_ris, r);
      out.factor_row[l][r] = p.coef * aw * base;
      auto& d = out.deriv_rows[l][r];
      for (int i = 0; i < 2; ++i)
        d.row(i) = p.coef * aw * hrow(link.h_dx[i], p.a_ris, r);
      d.row(2) = p.coef * aw *
                 (p.partials.daoa_dvarphi * base_d + hrow(link.h_dphi, p.a_ris, r));
      if (l >= 1) {
        const int col = 3 + LocationParams::block_slot(l, n, n_bs);
        for (int i = 0; i < 2; ++i)
          d.row(col + i) =
              p.coef * ((-kI * link.omega * p.partials.dtoa_dr[i] * aw +
                         p.partials.daod_dr[i] * daw) *
                            base +
                        aw * p.partials.daoa_dr[i] * base_d);
      }
    }
  }
  return out;
}

DerivativeVectors ue_side_derivative_vectors(const Scene& scene, const PathParams& paths,
                                             const GainRealization& gains,
                                             const BeamWeights& weights, const RisProfile& theta,
                                             const SystemConfig& cfg, int n, int l2, int js,
                                             int m, int r) {
  const int j = (n + 1) + js * cfg.n_bs;
  const UeSideLink link = make_ue_side_link(scene, paths, gains, cfg, n, j);
  const auto& p = link.path[l2];
  const Eigen::VectorXcd bvec = theta.asDiagonal() * (link.ch.g_mat * weights[n][js][m]);
  const complex<double> dot_plain = p.a_ris.dot(bvec);
  const complex<double> dot_alpha = p.a_ris_alpha.dot(bvec);
  const complex<double> value = p.coef * p.a_ue[r] * dot_plain;
  const complex<double> ratio = dot_alpha / dot_plain;

  DerivativeVectors out;
  out.value = value;
  for (int i = 0; i < 2; ++i) {
    const ScalarPair sp = ue_side_pair(link, p, r, p.partials.dtoa_db[i],
                                       p.partials.daoa_db[i], p.partials.daod_db[i]);
    out.position[i] = sp.s + sp.t * ratio;
  }
  out.orientation = -kI * link.alpha_ue[r] * p.cos_aoa * p.partials.daoa_domega;
  out.scatterer.setZero();
  if (l2 >= 1)
    for (int i = 0; i < 2; ++i) {
      const ScalarPair sp = ue_side_pair(link, p, r, p.partials.dtoa_du[i],
                                         p.partials.daoa_du[i], p.partials.daod_du[i]);
      out.scatterer[i] = sp.s + sp.t * ratio;
    }
  return out;
}

DerivativeVectors bs_side_derivative_vectors(const Scene& scene, const PathParams& paths,
                                             const GainRealization& gains,
                                             const BeamWeights& weights, const RisProfile& theta,
                                             const SystemConfig& cfg, int n, int l1, int js,
                                             int m, int r) {
  const int j = (n + 1) + js * cfg.n_bs;
  const BsSideLink link = make_bs_side_link(scene, paths, gains, theta, cfg, n, j);
  const auto& p = link.path[l1];
  const Eigen::VectorXcd& w = weights[n][js][m];
  const complex<double> aw = p.a_tx.dot(w);
  const complex<double> daw = p.da_tx.dot(w);

  DerivativeVectors out;
  out.value = p.coef * aw * p.v[r];
  for (int i = 0; i < 2; ++i) out.position[i] = p.vx[i][r] / p.v[r];
  out.orientation = (p.partials.daoa_dvarphi * p.vd[r] + p.vphi[r]) / p.v[r];
  out.scatterer.setZero();
  if (l1 >= 1)
    for (int i = 0; i < 2; ++i)
      out.scatterer[i] = -kI * link.omega * p.partials.dtoa_dr[i] +
                         p.partials.daod_dr[i] * daw / aw +
                         p.partials.daoa_dr[i] * p.vd[r] / p.v[r];
  return out;
}

Eigen::MatrixXcd jacobian_gamma_h(const Scene& scene, const PathParams& paths,
                                  const GainRealization& gains, const BeamWeights& weights,
                                  const RisProfile& theta, const SystemConfig& cfg,
                                  const Eigen::VectorXcd& h_stacked) {
  const UeSideDerivativeBlocks blocks =
      ue_side_derivative_blocks(scene, paths, gains, weights, theta, cfg);
  Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(blocks.through_mu[0].rows(),
                                                blocks.through_mu[0].cols());
  for (std::size_t k = 0; k < blocks.through_mu.size(); ++k)
    jac += h_stacked[static_cast<int>(k)] *
           (blocks.through_mu[k] + blocks.through_channel[k]);
  return jac;
}

Eigen::MatrixXcd jacobian_lambda_g(const Scene& scene, const PathParams& paths,
                                   const GainRealization& gains, const BeamWeights& weights,
                                   const RisProfile& theta, const SystemConfig& cfg,
                                   const Eigen::VectorXcd& g_stacked) {
  const BsSideDerivativeBlocks blocks =
      bs_side_derivative_blocks(scene, paths, gains, weights, theta, cfg);
  Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(blocks.xi[0].rows(), blocks.xi[0].cols());
  for (std::size_t k = 0; k < blocks.xi.size(); ++k)
    jac += g_stacked[static_cast<int>(k)] * blocks.xi[k];
  return jac;
}

}  // namespace jlbo
