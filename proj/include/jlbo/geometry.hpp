// SPDX-License-Identifier: MIT
/// @file geometry.hpp
/// @brief Planar deployment geometry: scene sampling, per-path delay/angle
///        extraction, and the flat location-parameter vector with its halves.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "jlbo/config.hpp"
#include "jlbo/rng.hpp"

namespace jlbo {

/// Positions and orientations of every entity.  Scatterer lists are indexed
/// [bs][path-1]; path 0 of each leg is the direct path and has no scatterer.
struct Scene {
  std::vector<Eigen::Vector2d> bs_positions;
  std::vector<double> bs_orientations;
  Eigen::Vector2d ris_position = Eigen::Vector2d::Zero();
  double ris_orientation = 0.0;
  Eigen::Vector2d ue_position = Eigen::Vector2d::Zero();
  double ue_orientation = 0.0;
  std::vector<std::vector<Eigen::Vector2d>> bs_ris_scatterers;
  std::vector<std::vector<Eigen::Vector2d>> ris_ue_scatterers;
  double light_speed = kLightSpeedDefault;

  int n_bs() const { return static_cast<int>(bs_positions.size()); }
  int n_paths_bs_ris() const {
    return bs_ris_scatterers.empty() ? 0 : static_cast<int>(bs_ris_scatterers[0].size());
  }
  int n_paths_ris_ue() const {
    return ris_ue_scatterers.empty() ? 0 : static_cast<int>(ris_ue_scatterers[0].size());
  }
};

/// Per-path propagation parameters, indexed [bs][path] with path 0 direct.
struct PathParams {
  std::vector<std::vector<double>> toa_bs_ris;  ///< BS->RIS delay (s)
  std::vector<std::vector<double>> aod_bs;      ///< departure angle at the BS
  std::vector<std::vector<double>> aoa_ris;     ///< arrival angle at the RIS
  std::vector<std::vector<double>> toa_ris_ue;  ///< RIS->UE delay (s)
  std::vector<std::vector<double>> aod_ris;     ///< departure angle at the RIS
  std::vector<std::vector<double>> aoa_ue;      ///< arrival angle at the UE
};

/// Flat real location-parameter vector.
///
/// Layout: [r-block | u-block | ris_orientation | ue_orientation | b | x].
/// Each scatterer block is path-major, BS-minor, with one zero-filled padding
/// slot (path index L+1) per BS, so block lengths are 2 N (L+1); the total
/// dimension is 2 N (L1+1) + 2 N (L2+1) + 6.  The two estimation halves are
///   kappa1 = [x, ris_orientation, r-block]  (dimension 2 N (L1+1) + 3),
///   kappa2 = [b, ue_orientation, u-block]   (dimension 2 N (L2+1) + 3).
struct LocationParams {
  Eigen::VectorXd kappa;
  int n_bs = 0;
  int l1 = 0;  ///< scattered paths, BS->RIS leg
  int l2 = 0;  ///< scattered paths, RIS->UE leg

  int dim() const { return 2 * n_bs * (l1 + 1) + 2 * n_bs * (l2 + 1) + 6; }
  int r_offset() const { return 0; }
  int u_offset() const { return 2 * n_bs * (l1 + 1); }
  int ris_orientation_index() const { return u_offset() + 2 * n_bs * (l2 + 1); }
  int ue_orientation_index() const { return ris_orientation_index() + 1; }
  int b_offset() const { return ris_orientation_index() + 2; }
  int x_offset() const { return ris_orientation_index() + 4; }
  /// Scatterer coordinates of 1-based path l at 0-based BS n inside a block.
  static int block_slot(int l, int n, int n_bs) { return 2 * ((l - 1) * n_bs + n); }

  Eigen::VectorXd kappa1() const;
  Eigen::VectorXd kappa2() const;
  void set_kappa1(const Eigen::VectorXd& k1);
  void set_kappa2(const Eigen::VectorXd& k2);
};

/// Planar angle of a 2-vector (atan2 convention) and its gradient.
double planar_angle(const Eigen::Vector2d& v);
Eigen::Vector2d planar_angle_gradient(const Eigen::Vector2d& v);

/// Uniform random scene over the configured region.  Every pair of entities
/// is at least cfg.min_separation_m apart; offending points are redrawn up to
/// 10^4 times before a std::runtime_error.
Scene sample_scene(const SystemConfig& cfg, Rng& rng);

/// Delays and angles of every path of both legs.
PathParams path_params(const Scene& scene);

/// Scene -> flat parameter vector and back.  unpack ignores padding slots;
/// pack always zero-fills them, so pack(unpack(p, t)) == p holds bitwise for
/// any p in the image of pack.
LocationParams pack_kappa(const Scene& scene);
Scene unpack_kappa(const LocationParams& params, const Scene& templ);

/// Apply one half onto a copy of a base scene (the other half and all known
/// anchors are taken from the base).
Scene scene_with_kappa1(const Scene& base, const Eigen::VectorXd& k1, int l1);
Scene scene_with_kappa2(const Scene& base, const Eigen::VectorXd& k2, int l2);

/// Indices of structurally identifiable coordinates (padding slots excluded)
/// within kappa1 / kappa2 / full kappa.
std::vector<int> kappa1_identifiable(int n_bs, int l1);
std::vector<int> kappa2_identifiable(int n_bs, int l2);
std::vector<int> kappa_identifiable(const LocationParams& params);

/// Truth perturbed by exactly radius_m in a random direction per position and
/// +-radius_rad per orientation; used for estimator initialization.
Scene perturb_scene(const Scene& scene, double radius_m, double radius_rad, Rng& rng);

}  // namespace jlbo
