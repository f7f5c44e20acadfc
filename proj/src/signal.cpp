// SPDX-License-Identifier: MIT
/// @file signal.cpp
#include "jlbo/signal.hpp"

#include <cmath>

namespace jlbo {

using std::complex;

BeamWeights random_beam_weights(const SystemConfig& cfg, Rng& rng) {
  BeamWeights w(cfg.n_bs);
  for (int n = 0; n < cfg.n_bs; ++n) {
    w[n].resize(cfg.n_subcarriers_per_bs);
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      w[n][js].resize(cfg.n_pilots);
      for (int m = 0; m < cfg.n_pilots; ++m) {
        Eigen::VectorXcd v(cfg.n_tx);
        for (int k = 0; k < cfg.n_tx; ++k) v[k] = rng.complex_normal(1.0);
        w[n][js][m] = v / v.norm();
      }
    }
  }
  return w;
}

RisProfile random_ris_profile(const SystemConfig& cfg, Rng& rng) {
  RisProfile theta(cfg.n_ris);
  for (int k = 0; k < cfg.n_ris; ++k)
    theta[k] = std::exp(complex<double>(0.0, rng.uniform(-kPi, kPi)));
  return theta;
}

int stack_dimension(const SystemConfig& cfg) {
  return cfg.n_bs * cfg.n_subcarriers_per_bs * cfg.n_pilots * cfg.n_ue;
}

int stack_row(const SystemConfig& cfg, int n, int js, int m, int r) {
  return ((n * cfg.n_subcarriers_per_bs + js) * cfg.n_pilots + m) * cfg.n_ue + r;
}

void for_each_stack_row(const SystemConfig& cfg,
                        const std::function<void(int, int, int, int, int, int)>& fn) {
  int row = 0;
  for (int n = 0; n < cfg.n_bs; ++n)
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      const int j = (n + 1) + js * cfg.n_bs;
      for (int m = 0; m < cfg.n_pilots; ++m)
        for (int r = 0; r < cfg.n_ue; ++r) fn(row++, n, js, j, m, r);
    }
}

Eigen::VectorXcd noiseless_stack(const Scene& scene, const PathParams& paths,
                                 const GainRealization& gains, const BeamWeights& weights,
                                 const RisProfile& theta, const SystemConfig& cfg) {
  Eigen::VectorXcd y(stack_dimension(cfg));
  for (int n = 0; n < cfg.n_bs; ++n) {
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      const int j = (n + 1) + js * cfg.n_bs;
      const ChannelPair ch = assemble_channels(scene, paths, gains, cfg, n, j);
      const Eigen::MatrixXcd cascade = ch.h_mat * theta.asDiagonal() * ch.g_mat;
      for (int m = 0; m < cfg.n_pilots; ++m) {
        const Eigen::VectorXcd obs = cascade * weights[n][js][m];
        for (int r = 0; r < cfg.n_ue; ++r) y[stack_row(cfg, n, js, m, r)] = obs[r];
      }
    }
  }
  return y;
}

Eigen::VectorXcd add_noise(const Eigen::VectorXcd& clean, double sigma2, Rng& rng) {
  Eigen::VectorXcd out = clean;
  for (int i = 0; i < out.size(); ++i) out[i] += rng.complex_normal(sigma2);
  return out;
}

Eigen::VectorXcd mu_vector(const PathParams& paths, const SystemConfig& cfg, int n, int j,
                           int l2, int r) {
  const double lambda = subcarrier_wavelength(j, cfg);
  const double omega = angular_frequency(j, cfg);
  const double spacing = cfg.light_speed / cfg.carrier_hz / 2.0;
  const double pf = cfg.steering_phase_factor;
  const Eigen::VectorXcd a_ue =
      steering_vector(paths.aoa_ue[n][l2], cfg.n_ue, spacing, lambda, pf);
  const Eigen::VectorXcd a_ris =
      steering_vector(paths.aod_ris[n][l2], cfg.n_ris, spacing, lambda, pf);
  const complex<double> coef = std::sqrt(static_cast<double>(cfg.n_ris) * cfg.n_ue) *
                               std::exp(complex<double>(0.0, -omega * paths.toa_ris_ue[n][l2])) *
                               a_ue[r];
  return coef * a_ris.conjugate();
}

Eigen::MatrixXcd build_gamma(const Scene& scene, const PathParams& paths,
                             const GainRealization& gains, const BeamWeights& weights,
                             const RisProfile& theta, const SystemConfig& cfg) {
  const int l2 = scene.n_paths_ris_ue();
  Eigen::MatrixXcd gamma =
      Eigen::MatrixXcd::Zero(stack_dimension(cfg), cfg.n_bs * (l2 + 1));
  for (int n = 0; n < cfg.n_bs; ++n) {
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      const int j = (n + 1) + js * cfg.n_bs;
      const ChannelPair ch = assemble_channels(scene, paths, gains, cfg, n, j);
      for (int m = 0; m < cfg.n_pilots; ++m) {
        const Eigen::VectorXcd bvec =
            theta.asDiagonal() * (ch.g_mat * weights[n][js][m]);
        for (int l = 0; l <= l2; ++l)
          for (int r = 0; r < cfg.n_ue; ++r)
            gamma(stack_row(cfg, n, js, m, r), n * (l2 + 1) + l) =
                mu_vector(paths, cfg, n, j, l, r).transpose() * bvec;
      }
    }
  }
  return gamma;
}

Eigen::MatrixXcd build_lambda(const Scene& scene, const PathParams& paths,
                              const GainRealization& gains, const BeamWeights& weights,
                              const RisProfile& theta, const SystemConfig& cfg) {
  const int l1 = scene.n_paths_bs_ris();
  const double spacing = cfg.light_speed / cfg.carrier_hz / 2.0;
  const double pf = cfg.steering_phase_factor;
  const double scale = std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_ris);
  Eigen::MatrixXcd lambda =
      Eigen::MatrixXcd::Zero(stack_dimension(cfg), cfg.n_bs * (l1 + 1));
  for (int n = 0; n < cfg.n_bs; ++n) {
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      const int j = (n + 1) + js * cfg.n_bs;
      const double wavelength = subcarrier_wavelength(j, cfg);
      const double omega = angular_frequency(j, cfg);
      const ChannelPair ch = assemble_channels(scene, paths, gains, cfg, n, j);
      const Eigen::MatrixXcd recv = ch.h_mat * theta.asDiagonal();  // n_ue x n_ris
      for (int l = 0; l <= l1; ++l) {
        const Eigen::VectorXcd a_tx =
            steering_vector(paths.aod_bs[n][l], cfg.n_tx, spacing, wavelength, pf);
        const Eigen::VectorXcd a_ris =
            steering_vector(paths.aoa_ris[n][l], cfg.n_ris, spacing, wavelength, pf);
        const Eigen::VectorXcd c_all = recv * a_ris;  // per UE antenna
        const complex<double> phasor =
            scale * std::exp(complex<double>(0.0, -omega * paths.toa_bs_ris[n][l]));
        for (int m = 0; m < cfg.n_pilots; ++m) {
          const complex<double> tx_proj = a_tx.dot(weights[n][js][m]);
          for (int r = 0; r < cfg.n_ue; ++r)
            lambda(stack_row(cfg, n, js, m, r), n * (l1 + 1) + l) =
                phasor * tx_proj * c_all[r];
        }
      }
    }
  }
  return lambda;
}

Eigen::MatrixXcd build_product_basis(const Scene& scene, const PathParams& paths,
                                     const BeamWeights& weights, const RisProfile& theta,
                                     const SystemConfig& cfg) {
  const int l1n = scene.n_paths_bs_ris() + 1;
  const int l2n = scene.n_paths_ris_ue() + 1;
  const double spacing = cfg.light_speed / cfg.carrier_hz / 2.0;
  const double pf = cfg.steering_phase_factor;
  const double scale = std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_ris);
  Eigen::MatrixXcd basis =
      Eigen::MatrixXcd::Zero(stack_dimension(cfg), cfg.n_bs * l1n * l2n);
  for (int n = 0; n < cfg.n_bs; ++n) {
    for (int js = 0; js < cfg.n_subcarriers_per_bs; ++js) {
      const int j = (n + 1) + js * cfg.n_bs;
      const double wavelength = subcarrier_wavelength(j, cfg);
      const double omega = angular_frequency(j, cfg);
      for (int l1 = 0; l1 < l1n; ++l1) {
        // The l1-th rank-1 term of G_n with its gain divided out.
        const Eigen::VectorXcd a_tx =
            steering_vector(paths.aod_bs[n][l1], cfg.n_tx, spacing, wavelength, pf);
        const Eigen::VectorXcd a_ris =
            steering_vector(paths.aoa_ris[n][l1], cfg.n_ris, spacing, wavelength, pf);
        const complex<double> phasor =
            scale * std::exp(complex<double>(0.0, -omega * paths.toa_bs_ris[n][l1]));
        const Eigen::VectorXcd reflected = theta.asDiagonal() * a_ris;
        for (int m = 0; m < cfg.n_pilots; ++m) {
          const Eigen::VectorXcd bvec = (phasor * a_tx.dot(weights[n][js][m])) * reflected;
          for (int l2 = 0; l2 < l2n; ++l2)
            for (int r = 0; r < cfg.n_ue; ++r)
              basis(stack_row(cfg, n, js, m, r), (n * l1n + l1) * l2n + l2) =
                  mu_vector(paths, cfg, n, j, l2, r).transpose() * bvec;
        }
      }
    }
  }
  return basis;
}

Eigen::VectorXcd stacked_observation(const std::vector<PilotRound>& rounds) {
  Eigen::Index total = 0;
  for (const PilotRound& round : rounds) total += round.y.size();
  Eigen::VectorXcd y(total);
  Eigen::Index offset = 0;
  for (const PilotRound& round : rounds) {
    y.segment(offset, round.y.size()) = round.y;
    offset += round.y.size();
  }
  return y;
}

Eigen::MatrixXcd build_gamma_stacked(const Scene& scene, const PathParams& paths,
                                     const GainRealization& gains,
                                     const std::vector<PilotRound>& rounds,
                                     const SystemConfig& cfg) {
  const int rows = stack_dimension(cfg);
  Eigen::MatrixXcd gamma(rows * static_cast<Eigen::Index>(rounds.size()),
                         cfg.n_bs * (scene.n_paths_ris_ue() + 1));
  for (std::size_t t = 0; t < rounds.size(); ++t)
    gamma.middleRows(static_cast<Eigen::Index>(t) * rows, rows) =
        build_gamma(scene, paths, gains, rounds[t].weights, rounds[t].theta, cfg);
  return gamma;
}

Eigen::MatrixXcd build_lambda_stacked(const Scene& scene, const PathParams& paths,
                                      const GainRealization& gains,
                                      const std::vector<PilotRound>& rounds,
                                      const SystemConfig& cfg) {
  const int rows = stack_dimension(cfg);
  Eigen::MatrixXcd lambda(rows * static_cast<Eigen::Index>(rounds.size()),
                          cfg.n_bs * (scene.n_paths_bs_ris() + 1));
  for (std::size_t t = 0; t < rounds.size(); ++t)
    lambda.middleRows(static_cast<Eigen::Index>(t) * rows, rows) =
        build_lambda(scene, paths, gains, rounds[t].weights, rounds[t].theta, cfg);
  return lambda;
}

Eigen::MatrixXcd build_product_basis_stacked(const Scene& scene, const PathParams& paths,
                                             const std::vector<PilotRound>& rounds,
                                             const SystemConfig& cfg) {
  const int rows = stack_dimension(cfg);
  Eigen::MatrixXcd basis(rows * static_cast<Eigen::Index>(rounds.size()),
                         cfg.n_bs * (scene.n_paths_bs_ris() + 1) *
                             (scene.n_paths_ris_ue() + 1));
  for (std::size_t t = 0; t < rounds.size(); ++t)
    basis.middleRows(static_cast<Eigen::Index>(t) * rows, rows) =
        build_product_basis(scene, paths, rounds[t].weights, rounds[t].theta, cfg);
  return basis;
}

}  // namespace jlbo
