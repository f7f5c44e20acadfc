// SPDX-License-Identifier: MIT
/// @file channel.cpp
#include "jlbo/channel.hpp"

#include <cmath>

namespace jlbo {

using std::complex;

Eigen::VectorXcd steering_vector(double angle, int n_elements, double spacing,
                                 double wavelength, double phase_factor) {
  Eigen::VectorXcd a(n_elements);
  const double slope = spacing * phase_factor / wavelength * std::sin(angle);
  for (int k = 0; k < n_elements; ++k)
    a[k] = std::exp(complex<double>(0.0, -slope * k));
  return a;
}

Eigen::VectorXcd steering_vector_derivative(double angle, int n_elements, double spacing,
                                            double wavelength, double phase_factor) {
  Eigen::VectorXcd a = steering_vector(angle, n_elements, spacing, wavelength, phase_factor);
  const double base = spacing * phase_factor / wavelength * std::cos(angle);
  for (int k = 0; k < n_elements; ++k) a[k] *= complex<double>(0.0, -base * k);
  return a;
}

Eigen::VectorXd steering_phase_slopes(int n_elements, double spacing, double wavelength,
                                      double phase_factor) {
  Eigen::VectorXd alpha(n_elements);
  const double base = spacing * phase_factor / wavelength;
  for (int k = 0; k < n_elements; ++k) alpha[k] = base * k;
  return alpha;
}

double subcarrier_spacing_hz(const SystemConfig& cfg) {
  return 1.0 / (cfg.n_subcarriers_total() * cfg.sample_period_s);
}

double subcarrier_wavelength(int j, const SystemConfig& cfg) {
  return cfg.light_speed / (cfg.carrier_hz + j * subcarrier_spacing_hz(cfg));
}

double angular_frequency(int j, const SystemConfig& cfg) {
  return 2.0 * kPi * j * subcarrier_spacing_hz(cfg);
}

std::vector<int> subcarrier_schedule(int n, int n_bs, int n_sub_per_bs) {
  std::vector<int> out(n_sub_per_bs);
  for (int s = 0; s < n_sub_per_bs; ++s) out[s] = n + s * n_bs;
  return out;
}

double half_wavelength_spacing(const SystemConfig& cfg) {
  return cfg.light_speed / cfg.carrier_hz / 2.0;
}

Eigen::VectorXcd GainRealization::g_stacked() const {
  int total = 0;
  for (const auto& v : g) total += static_cast<int>(v.size());
  Eigen::VectorXcd out(total);
  int at = 0;
  for (const auto& v : g) {
    out.segment(at, v.size()) = v;
    at += static_cast<int>(v.size());
  }
  return out;
}

Eigen::VectorXcd GainRealization::h_stacked() const {
  int total = 0;
  for (const auto& v : h) total += static_cast<int>(v.size());
  Eigen::VectorXcd out(total);
  int at = 0;
  for (const auto& v : h) {
    out.segment(at, v.size()) = v;
    at += static_cast<int>(v.size());
  }
  return out;
}

double gain_variance(double path_length_m) {
  return std::pow(10.0, -6.64) / (path_length_m * path_length_m);
}

GainVariances path_gain_variances(const Scene& scene) {
  GainVariances out;
  const auto& b = scene.ris_position;
  const auto& x = scene.ue_position;
  for (int n = 0; n < scene.n_bs(); ++n) {
    const auto& a = scene.bs_positions[n];
    Eigen::VectorXd gv(scene.n_paths_bs_ris() + 1);
    gv[0] = gain_variance((b - a).norm());
    for (int l = 1; l <= scene.n_paths_bs_ris(); ++l) {
      const auto& r = scene.bs_ris_scatterers[n][l - 1];
      gv[l] = gain_variance((r - a).norm() + (b - r).norm());
    }
    out.g_var.push_back(std::move(gv));

    Eigen::VectorXd hv(scene.n_paths_ris_ue() + 1);
    hv[0] = gain_variance((x - b).norm());
    for (int l = 1; l <= scene.n_paths_ris_ue(); ++l) {
      const auto& u = scene.ris_ue_scatterers[n][l - 1];
      hv[l] = gain_variance((u - b).norm() + (x - u).norm());
    }
    out.h_var.push_back(std::move(hv));
  }
  return out;
}

GainRealization sample_gains(const GainVariances& variances, Rng& rng) {
  GainRealization out;
  for (const auto& gv : variances.g_var) {
    Eigen::VectorXcd g(gv.size());
    for (int l = 0; l < gv.size(); ++l) g[l] = rng.complex_normal(gv[l]);
    out.g.push_back(std::move(g));
  }
  for (const auto& hv : variances.h_var) {
    Eigen::VectorXcd h(hv.size());
    for (int l = 0; l < hv.size(); ++l) h[l] = rng.complex_normal(hv[l]);
    out.h.push_back(std::move(h));
  }
  return out;
}

ChannelPair assemble_channels(const Scene& scene, const PathParams& paths,
                              const GainRealization& gains, const SystemConfig& cfg, int n,
                              int j) {
  const double lambda = subcarrier_wavelength(j, cfg);
  const double omega = angular_frequency(j, cfg);
  const double spacing = half_wavelength_spacing(cfg);
  const double pf = cfg.steering_phase_factor;
  const int l1 = scene.n_paths_bs_ris();
  const int l2 = scene.n_paths_ris_ue();

  ChannelPair out;
  out.g_mat = Eigen::MatrixXcd::Zero(cfg.n_ris, cfg.n_tx);
  const double g_scale = std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_ris);
  for (int l = 0; l <= l1; ++l) {
    const Eigen::VectorXcd a_rx =
        steering_vector(paths.aoa_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    const Eigen::VectorXcd a_tx =
        steering_vector(paths.aod_bs[n][l], cfg.n_tx, spacing, lambda, pf);
    const complex<double> coef =
        g_scale * gains.g[n][l] * std::exp(complex<double>(0.0, -omega * paths.toa_bs_ris[n][l]));
    out.g_mat.noalias() += coef * a_rx * a_tx.adjoint();
  }

  out.h_mat = Eigen::MatrixXcd::Zero(cfg.n_ue, cfg.n_ris);
  const double h_scale = std::sqrt(static_cast<double>(cfg.n_ris) * cfg.n_ue);
  for (int l = 0; l <= l2; ++l) {
    const Eigen::VectorXcd a_rx =
        steering_vector(paths.aoa_ue[n][l], cfg.n_ue, spacing, lambda, pf);
    const Eigen::VectorXcd a_tx =
        steering_vector(paths.aod_ris[n][l], cfg.n_ris, spacing, lambda, pf);
    const complex<double> coef =
        h_scale * gains.h[n][l] * std::exp(complex<double>(0.0, -omega * paths.toa_ris_ue[n][l]));
    out.h_mat.noalias() += coef * a_rx * a_tx.adjoint();
  }
  return out;
}

}  // namespace jlbo
