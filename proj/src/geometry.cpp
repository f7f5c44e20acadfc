// SPDX-License-Identifier: MIT
/// @file geometry.cpp
#include "jlbo/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace jlbo {

double planar_angle(const Eigen::Vector2d& v) { return std::atan2(v.y(), v.x()); }

Eigen::Vector2d planar_angle_gradient(const Eigen::Vector2d& v) {
  return Eigen::Vector2d(-v.y(), v.x()) / v.squaredNorm();
}

Eigen::VectorXd LocationParams::kappa1() const {
  Eigen::VectorXd k1(2 * n_bs * (l1 + 1) + 3);
  k1.segment<2>(0) = kappa.segment<2>(x_offset());
  k1[2] = kappa[ris_orientation_index()];
  k1.tail(2 * n_bs * (l1 + 1)) = kappa.segment(r_offset(), 2 * n_bs * (l1 + 1));
  return k1;
}

Eigen::VectorXd LocationParams::kappa2() const {
  Eigen::VectorXd k2(2 * n_bs * (l2 + 1) + 3);
  k2.segment<2>(0) = kappa.segment<2>(b_offset());
  k2[2] = kappa[ue_orientation_index()];
  k2.tail(2 * n_bs * (l2 + 1)) = kappa.segment(u_offset(), 2 * n_bs * (l2 + 1));
  return k2;
}

void LocationParams::set_kappa1(const Eigen::VectorXd& k1) {
  kappa.segment<2>(x_offset()) = k1.segment<2>(0);
  kappa[ris_orientation_index()] = k1[2];
  kappa.segment(r_offset(), 2 * n_bs * (l1 + 1)) = k1.tail(2 * n_bs * (l1 + 1));
}

void LocationParams::set_kappa2(const Eigen::VectorXd& k2) {
  kappa.segment<2>(b_offset()) = k2.segment<2>(0);
  kappa[ue_orientation_index()] = k2[2];
  kappa.segment(u_offset(), 2 * n_bs * (l2 + 1)) = k2.tail(2 * n_bs * (l2 + 1));
}

namespace {

constexpr int kMaxRedraws = 10000;

Eigen::Vector2d draw_separated(const SystemConfig& cfg, Rng& rng,
                               const std::vector<Eigen::Vector2d>& placed) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Eigen::Vector2d p(rng.uniform(0.0, cfg.region_m), rng.uniform(0.0, cfg.region_m));
    bool ok = true;
    for (const auto& q : placed) {
      if ((p - q).norm() < cfg.min_separation_m) {
        ok = false;
        break;
      }
    }
    if (ok) return p;
  }
  throw std::runtime_error(
      "sample_scene: could not place an entity with the required separation "
      "after 10000 redraws; region too crowded for the configured counts");
}

}  // namespace

Scene sample_scene(const SystemConfig& cfg, Rng& rng) {
  Scene scene;
  scene.light_speed = cfg.light_speed;
  std::vector<Eigen::Vector2d> placed;
  placed.reserve(cfg.n_bs * (2 + cfg.n_paths_bs_ris + cfg.n_paths_ris_ue));

  for (int n = 0; n < cfg.n_bs; ++n) {
    scene.bs_positions.push_back(draw_separated(cfg, rng, placed));
    placed.push_back(scene.bs_positions.back());
    scene.bs_orientations.push_back(rng.uniform(-kPi, kPi));
  }
  scene.ris_position = draw_separated(cfg, rng, placed);
  placed.push_back(scene.ris_position);
  scene.ris_orientation = rng.uniform(-kPi, kPi);
  scene.ue_position = draw_separated(cfg, rng, placed);
  placed.push_back(scene.ue_position);
  scene.ue_orientation = rng.uniform(-kPi, kPi);

  scene.bs_ris_scatterers.resize(cfg.n_bs);
  scene.ris_ue_scatterers.resize(cfg.n_bs);
  for (int n = 0; n < cfg.n_bs; ++n) {
    for (int l = 0; l < cfg.n_paths_bs_ris; ++l) {
      scene.bs_ris_scatterers[n].push_back(draw_separated(cfg, rng, placed));
      placed.push_back(scene.bs_ris_scatterers[n].back());
    }
    for (int l = 0; l < cfg.n_paths_ris_ue; ++l) {
      scene.ris_ue_scatterers[n].push_back(draw_separated(cfg, rng, placed));
      placed.push_back(scene.ris_ue_scatterers[n].back());
    }
  }
  return scene;
}

PathParams path_params(const Scene& scene) {
  PathParams pp;
  const double c = scene.light_speed;
  const auto& b = scene.ris_position;
  const auto& x = scene.ue_position;
  const double varphi = scene.ris_orientation;
  const double omega = scene.ue_orientation;

  for (int n = 0; n < scene.n_bs(); ++n) {
    const auto& a = scene.bs_positions[n];
    const double phi = scene.bs_orientations[n];

    std::vector<double> toa1{(b - a).norm() / c};
    std::vector<double> aod_b{planar_angle(b - a) - phi};
    std::vector<double> aoa_r{kPi + planar_angle(b - a) - varphi};
    for (const auto& r : scene.bs_ris_scatterers[n]) {
      toa1.push_back(((r - a).norm() + (b - r).norm()) / c);
      aod_b.push_back(planar_angle(r - a) - phi);
      aoa_r.push_back(kPi + planar_angle(b - r) - varphi);
    }
    pp.toa_bs_ris.push_back(std::move(toa1));
    pp.aod_bs.push_back(std::move(aod_b));
    pp.aoa_ris.push_back(std::move(aoa_r));

    std::vector<double> toa2{(x - b).norm() / c};
    std::vector<double> aod_r{kPi + planar_angle(x - b) - varphi};
    std::vector<double> aoa_u{planar_angle(x - b) - omega};
    for (const auto& u : scene.ris_ue_scatterers[n]) {
      toa2.push_back(((u - b).norm() + (x - u).norm()) / c);
      aod_r.push_back(kPi + planar_angle(u - b) - varphi);
      aoa_u.push_back(planar_angle(x - u) - omega);
    }
    pp.toa_ris_ue.push_back(std::move(toa2));
    pp.aod_ris.push_back(std::move(aod_r));
    pp.aoa_ue.push_back(std::move(aoa_u));
  }
  return pp;
}

LocationParams pack_kappa(const Scene& scene) {
  LocationParams p;
  p.n_bs = scene.n_bs();
  p.l1 = scene.n_paths_bs_ris();
  p.l2 = scene.n_paths_ris_ue();
  p.kappa = Eigen::VectorXd::Zero(p.dim());
  for (int l = 1; l <= p.l1; ++l)
    for (int n = 0; n < p.n_bs; ++n)
      p.kappa.segment<2>(p.r_offset() + LocationParams::block_slot(l, n, p.n_bs)) =
          scene.bs_ris_scatterers[n][l - 1];
  for (int l = 1; l <= p.l2; ++l)
    for (int n = 0; n < p.n_bs; ++n)
      p.kappa.segment<2>(p.u_offset() + LocationParams::block_slot(l, n, p.n_bs)) =
          scene.ris_ue_scatterers[n][l - 1];
  p.kappa[p.ris_orientation_index()] = scene.ris_orientation;
  p.kappa[p.ue_orientation_index()] = scene.ue_orientation;
  p.kappa.segment<2>(p.b_offset()) = scene.ris_position;
  p.kappa.segment<2>(p.x_offset()) = scene.ue_position;
  return p;
}

Scene unpack_kappa(const LocationParams& params, const Scene& templ) {
  Scene scene = templ;
  for (int l = 1; l <= params.l1; ++l)
    for (int n = 0; n < params.n_bs; ++n)
      scene.bs_ris_scatterers[n][l - 1] = params.kappa.segment<2>(
          params.r_offset() + LocationParams::block_slot(l, n, params.n_bs));
  for (int l = 1; l <= params.l2; ++l)
    for (int n = 0; n < params.n_bs; ++n)
      scene.ris_ue_scatterers[n][l - 1] = params.kappa.segment<2>(
          params.u_offset() + LocationParams::block_slot(l, n, params.n_bs));
  scene.ris_orientation = params.kappa[params.ris_orientation_index()];
  scene.ue_orientation = params.kappa[params.ue_orientation_index()];
  scene.ris_position = params.kappa.segment<2>(params.b_offset());
  scene.ue_position = params.kappa.segment<2>(params.x_offset());
  return scene;
}

Scene scene_with_kappa1(const Scene& base, const Eigen::VectorXd& k1, int l1) {
  Scene scene = base;
  const int n_bs = base.n_bs();
  scene.ue_position = k1.segment<2>(0);
  scene.ris_orientation = k1[2];
  for (int l = 1; l <= l1; ++l)
    for (int n = 0; n < n_bs; ++n)
      scene.bs_ris_scatterers[n][l - 1] =
          k1.segment<2>(3 + LocationParams::block_slot(l, n, n_bs));
  return scene;
}

Scene scene_with_kappa2(const Scene& base, const Eigen::VectorXd& k2, int l2) {
  Scene scene = base;
  const int n_bs = base.n_bs();
  scene.ris_position = k2.segment<2>(0);
  scene.ue_orientation = k2[2];
  for (int l = 1; l <= l2; ++l)
    for (int n = 0; n < n_bs; ++n)
      scene.ris_ue_scatterers[n][l - 1] =
          k2.segment<2>(3 + LocationParams::block_slot(l, n, n_bs));
  return scene;
}

namespace {

std::vector<int> half_identifiable(int n_bs, int l) {
  std::vector<int> idx = {0, 1, 2};
  for (int path = 1; path <= l; ++path)
    for (int n = 0; n < n_bs; ++n) {
      idx.push_back(3 + LocationParams::block_slot(path, n, n_bs));
      idx.push_back(4 + LocationParams::block_slot(path, n, n_bs));
    }
  return idx;
}

}  // namespace

std::vector<int> kappa1_identifiable(int n_bs, int l1) { return half_identifiable(n_bs, l1); }
std::vector<int> kappa2_identifiable(int n_bs, int l2) { return half_identifiable(n_bs, l2); }

std::vector<int> kappa_identifiable(const LocationParams& p) {
  std::vector<int> idx;
  for (int l = 1; l <= p.l1; ++l)
    for (int n = 0; n < p.n_bs; ++n) {
      idx.push_back(p.r_offset() + LocationParams::block_slot(l, n, p.n_bs));
      idx.push_back(p.r_offset() + LocationParams::block_slot(l, n, p.n_bs) + 1);
    }
  for (int l = 1; l <= p.l2; ++l)
    for (int n = 0; n < p.n_bs; ++n) {
      idx.push_back(p.u_offset() + LocationParams::block_slot(l, n, p.n_bs));
      idx.push_back(p.u_offset() + LocationParams::block_slot(l, n, p.n_bs) + 1);
    }
  for (int i = p.ris_orientation_index(); i < p.dim(); ++i) idx.push_back(i);
  return idx;
}

namespace {

Eigen::Vector2d offset_by(Rng& rng, double radius) {
  const double ang = rng.uniform(-kPi, kPi);
  return radius * Eigen::Vector2d(std::cos(ang), std::sin(ang));
}

}  // namespace

Scene perturb_scene(const Scene& scene, double radius_m, double radius_rad, Rng& rng) {
  Scene out = scene;
  out.ris_position += offset_by(rng, radius_m);
  out.ue_position += offset_by(rng, radius_m);
  for (auto& row : out.bs_ris_scatterers)
    for (auto& p : row) p += offset_by(rng, radius_m);
  for (auto& row : out.ris_ue_scatterers)
    for (auto& p : row) p += offset_by(rng, radius_m);
  out.ris_orientation += (rng.uniform() < 0.5 ? -1.0 : 1.0) * radius_rad;
  out.ue_orientation += (rng.uniform() < 0.5 ? -1.0 : 1.0) * radius_rad;
  return out;
}

}  // namespace jlbo
