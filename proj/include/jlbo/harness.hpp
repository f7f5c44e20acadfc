// SPDX-License-Identifier: MIT
/// @file harness.hpp
/// @brief Monte Carlo experiment harness: seeded trial execution across
///        sweep axes, NMSE metrics, baseline algorithms, and record
///        collection for the emitters.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jlbo/config.hpp"
#include "jlbo/driver.hpp"
#include "jlbo/geometry.hpp"

namespace jlbo {

/// Normalized squared error |est - truth|^2 / |truth|^2 (0 when both empty;
/// infinity when only truth is zero).
double nmse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

/// One emitted data point of a sweep.
struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  int iteration = 0;
  std::string algorithm;
  double nmse_position = 0.0;
  double nmse_kappa = 0.0;
  double crlb_total = 0.0;
  double residual = 0.0;
  double wall_ms = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

/// Runs `cfg.trials` seeded trials for every sweep value and every selected
/// algorithm; one record per (sweep value, algorithm, trial, outer
/// iteration), sorted by exactly that key. Bitwise-deterministic for a fixed
/// (config, seed) regardless of cfg.jobs.
std::vector<TrialRecord> run_monte_carlo(const SystemConfig& cfg);

/// Algorithm tags used in records.
inline constexpr const char* kAlgorithmJlbo = "jlbo";
inline constexpr const char* kAlgorithmRandomBf = "random-bf";
inline constexpr const char* kAlgorithmFixedRis = "fixed-ris";

}  // namespace jlbo
