// SPDX-License-Identifier: MIT
/// @file channel.hpp
/// @brief Frequency-selective cascaded channel synthesis for the BS-RIS-UE
///        link: steering vectors, per-subcarrier wavelengths, gain
///        realizations, and the per-base-station channel matrix pair (G, H).
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "jlbo/config.hpp"
#include "jlbo/geometry.hpp"
#include "jlbo/rng.hpp"

namespace jlbo {

/// Uniform-linear-array steering vector with entries
/// exp(-i * (spacing * phase_factor / wavelength) * k * sin(angle)),
/// k = 0..n_elements-1.
Eigen::VectorXcd steering_vector(double angle, int n_elements, double spacing,
                                 double wavelength, double phase_factor);

/// Entrywise derivative of steering_vector with respect to the angle:
/// d a_k / d angle = -i * alpha_k * cos(angle) * a_k with
/// alpha_k = (spacing * phase_factor / wavelength) * k.
Eigen::VectorXcd steering_vector_derivative(double angle, int n_elements, double spacing,
                                            double wavelength, double phase_factor);

/// Per-element phase slopes alpha_k = (spacing * phase_factor / wavelength) * k.
Eigen::VectorXd steering_phase_slopes(int n_elements, double spacing, double wavelength,
                                      double phase_factor);

/// Subcarrier spacing in Hz: 1 / (total subcarriers * sample period).
double subcarrier_spacing_hz(const SystemConfig& cfg);

/// Wavelength of global subcarrier j (1-based): c / (f_c + j * delta_f).
double subcarrier_wavelength(int j, const SystemConfig& cfg);

/// Baseband angular frequency of global subcarrier j (1-based): 2*pi*j*delta_f.
double angular_frequency(int j, const SystemConfig& cfg);

/// Global subcarrier indices (1-based) assigned to base station n (1-based):
/// {n, n + N, ..., n + (n_sub_per_bs - 1) * N} under the interleaved comb.
std::vector<int> subcarrier_schedule(int n, int n_bs, int n_sub_per_bs);

/// Half-wavelength element spacing at the carrier frequency.
double half_wavelength_spacing(const SystemConfig& cfg);

/// Complex path gains for every base station, one row per base station with
/// n_paths + 1 entries (index 0 is the direct path).
struct GainRealization {
  std::vector<Eigen::VectorXcd> g;  ///< BS-RIS gains, g[n][l1], l1 = 0..L1.
  std::vector<Eigen::VectorXcd> h;  ///< RIS-UE gains, h[n][l2], l2 = 0..L2.

  /// All BS-RIS gains stacked base-station-major, path-minor.
  Eigen::VectorXcd g_stacked() const;
  /// All RIS-UE gains stacked base-station-major, path-minor.
  Eigen::VectorXcd h_stacked() const;
};

/// Per-path gain variances mirroring GainRealization's layout.
struct GainVariances {
  std::vector<Eigen::VectorXd> g_var;
  std::vector<Eigen::VectorXd> h_var;
};

/// Free-space-style variance model 10^-6.64 / d^2 for a path of total length
/// d meters.
double gain_variance(double path_length_m);

/// Per-path variances for the whole scene from the variance model, with the
/// path length taken as the summed segment lengths through the scatterer.
GainVariances path_gain_variances(const Scene& scene);

/// Draws every gain as an independent circularly-symmetric complex Gaussian
/// with the given per-path variance.
GainRealization sample_gains(const GainVariances& variances, Rng& rng);

/// Channel matrices of one base station on one subcarrier.
struct ChannelPair {
  Eigen::MatrixXcd g_mat;  ///< BS-to-RIS channel, n_ris x n_tx.
  Eigen::MatrixXcd h_mat;  ///< RIS-to-UE channel, n_ue x n_ris.
};

/// Assembles G_n and H_n for base station n (0-based) on global subcarrier j
/// (1-based):
///   G_n = A_ris diag(sqrt(N_T N_R) g_l exp(-i Omega_j toa1_l)) A_bs^H,
///   H_n = A_ue  diag(sqrt(N_R N_U) h_l exp(-i Omega_j toa2_l)) A_ris_tx^H.
ChannelPair assemble_channels(const Scene& scene, const PathParams& paths,
                              const GainRealization& gains, const SystemConfig& cfg, int n,
                              int j);

}  // namespace jlbo
