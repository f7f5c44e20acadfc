// SPDX-License-Identifier: MIT
/// @file config.hpp
/// @brief Experiment configuration: named profiles, flat key-value parsing,
///        and the constants shared across the library.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jlbo {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kLightSpeedDefault = 3.0e8;

/// Independent variable of a Monte Carlo campaign.
enum class SweepAxis { kIterations, kNRis, kSnr, kBsRisDistance };

const char* sweep_axis_name(SweepAxis axis);
bool parse_sweep_axis(const std::string& text, SweepAxis* out);

/// Complete experiment description.  Every Monte Carlo artifact is a pure
/// function of this struct (profiles and config files only fill it in), so
/// two runs with equal configs and seeds are byte-identical.
struct SystemConfig {
  // Deployment and signal dimensions.
  int n_bs = 2;                  ///< number of base stations
  int n_tx = 8;                  ///< transmit antennas per BS
  int n_ue = 2;                  ///< receive antennas at the UE
  int n_ris = 16;                ///< reflecting elements
  int n_subcarriers_per_bs = 2;  ///< pilot subcarriers assigned to each BS
  int n_pilots = 8;              ///< pilot symbols per subcarrier
  int n_paths_bs_ris = 2;        ///< scattered paths on the BS->RIS leg
  int n_paths_ris_ue = 2;        ///< scattered paths on the RIS->UE leg

  // Physical constants of the deployment.
  double carrier_hz = 28e9;
  double sample_period_s = 1e-8;
  double region_m = 100.0;           ///< square region side length
  double light_speed = kLightSpeedDefault;
  double min_separation_m = 1.0;     ///< entity separation floor when sampling scenes
  double steering_phase_factor = kPi;  ///< element phase slope factor (see channel.hpp)

  // Monte Carlo campaign.
  std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  int trials = 50;
  std::uint64_t seed = 1;
  SweepAxis sweep = SweepAxis::kIterations;
  std::vector<double> sweep_values;  ///< empty = axis-dependent defaults

  // Estimator initialization (location guess = truth perturbed by these radii).
  double init_radius_m = 5.0;
  double init_radius_rad = 0.1;

  // Solver controls.
  int max_outer_iterations = 30;
  double outer_tolerance = 1e-5;
  int max_location_iterations = 100;
  double location_tolerance = 1e-10;
  /// SCA passes the outer loop grants the location block per cycle.  The
  /// outer loop shares one iteration counter across all blocks, so each cycle
  /// advances the location estimate by this many damped steps rather than
  /// solving to convergence; standalone estimate_location calls keep the full
  /// max_location_iterations budget.
  int location_steps_per_outer = 1;
  int beamformer_rounds = 5;
  bool diagonal_preconditioner = false;  ///< optional Jacobian column scaling
  /// Relative proximal weight of the location step's convex surrogate: the
  /// linearized least-squares model is augmented with mu*|delta|^2 where
  /// mu = location_damping * smax^2 (smax = largest singular value of the
  /// stacked Jacobian).  Keeps nearly unobservable directions (weak scattered
  /// paths) from absorbing huge minimum-norm moves; 0 restores pure
  /// Gauss-Newton.
  double location_damping = 1e-6;
  /// Trust radius on the location step direction (mixed meters/radians norm;
  /// meters dominate).  A Gauss-Newton direction longer than this is scaled
  /// back onto the radius before the line search.  Guards against accepted
  /// long jumps into aliased basins: with few subcarriers per BS the delay
  /// phasors repeat on a grid of several meters, and an early step can
  /// otherwise clear the true basin entirely.  0 disables the cap.
  /// estimate_location adapts the radius between iterations (halves it after
  /// a stalled line search, doubles it after full-step accepts).
  double location_trust_radius = 2.0;
  /// When set, each location half-step scores candidate geometries by the
  /// residual left after fitting all per-path gain products by least squares
  /// at that geometry — the misfit no gain choice can explain — and removes
  /// from the linearization the component the product fit can cancel.  Both
  /// gain blocks are concentrated out at once, so the scored landscape
  /// depends on the geometry alone; refitting only one side would score
  /// against the other side's stale fit and let its displaced minima drag
  /// the alternation.  The outer driver enables this; standalone estimation
  /// keeps the given gains fixed.
  bool location_gain_refit = false;

  // Harness behavior.
  bool baseline_random = false;
  bool baseline_fixed_ris = false;
  bool assumption_warn_only = false;  ///< continue instead of refusing on dimension failure
  bool timing = false;  ///< when off, wall_ms columns are 0 so output stays byte-stable
  int jobs = 1;         ///< worker threads for independent trials

  int n_subcarriers_total() const { return n_bs * n_subcarriers_per_bs; }
};

/// Small default profile: full trend suites run in minutes on one core.
SystemConfig desk_profile();
/// Large profile mirroring the full-scale deployment; overnight-sized runs.
SystemConfig paper_profile();
SystemConfig profile_by_name(const std::string& name);

/// Parse `key = value` lines (`#` comments, blank lines ignored) on top of a
/// base config.  Unknown keys raise std::runtime_error naming the key.
SystemConfig parse_config_text(const std::string& text, SystemConfig base);
SystemConfig load_config_file(const std::string& path, SystemConfig base);

/// Round-trippable rendering of a config in the same key-value format.
std::string config_to_text(const SystemConfig& cfg);

}  // namespace jlbo
