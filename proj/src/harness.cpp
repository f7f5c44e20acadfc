// SPDX-License-Identifier: MIT
/// @file harness.cpp
/// @brief Monte Carlo campaign execution.

#include "jlbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace jlbo {
namespace {

/// Sweep values actually enumerated: explicit config values (sorted) when
/// given, else the axis defaults. The iterations axis enumerates a single
/// run per trial and stamps the iteration number into the sweep column.
std::vector<double> effective_sweep_values(const SystemConfig& cfg) {
  if (!cfg.sweep_values.empty()) {
    std::vector<double> v = cfg.sweep_values;
    std::sort(v.begin(), v.end());
    return v;
  }
  switch (cfg.sweep) {
    case SweepAxis::kIterations:
      return {static_cast<double>(cfg.max_outer_iterations)};
    case SweepAxis::kNRis:
      return {16.0, 32.0, 64.0};
    case SweepAxis::kSnr: {
      std::vector<double> v = cfg.snr_db;
      if (v.empty()) v.push_back(20.0);
      std::sort(v.begin(), v.end());
      return v;
    }
    case SweepAxis::kBsRisDistance:
      return {10.0, 20.0, 40.0, 80.0};
  }
  return {0.0};
}

/// Applies one sweep value onto the campaign config.
SystemConfig trial_config(const SystemConfig& base, double value) {
  SystemConfig cfg = base;
  switch (base.sweep) {
    case SweepAxis::kIterations:
      break;  // the run length itself is the axis
    case SweepAxis::kNRis:
      cfg.n_ris = static_cast<int>(std::lround(value));
      break;
    case SweepAxis::kSnr:
      cfg.snr_db = {value};
      break;
    case SweepAxis::kBsRisDistance:
      break;  // handled in scene construction
  }
  return cfg;
}

/// Samples the trial scene; on the distance axis the RIS is re-placed on the
/// first base station's ray toward the UE at the controlled distance.
Scene trial_scene(const SystemConfig& cfg, double value, Rng& rng) {
  Scene scene = sample_scene(cfg, rng);
  if (cfg.sweep == SweepAxis::kBsRisDistance) {
    const Eigen::Vector2d ray = scene.ue_position - scene.bs_positions[0];
    const double len = ray.norm();
    if (len > 0.0) scene.ris_position = scene.bs_positions[0] + (value / len) * ray;
  }
  return scene;
}

BeamPolicy policy_for(const std::string& algorithm) {
  if (algorithm == kAlgorithmRandomBf) return BeamPolicy::kRandom;
  if (algorithm == kAlgorithmFixedRis) return BeamPolicy::kFixedRis;
  return BeamPolicy::kOptimize;
}

/// Runs one (sweep value, algorithm, trial) task. Everything random is drawn
/// from a stream derived only from the campaign seed and the task indices,
/// so results do not depend on scheduling.
std::vector<TrialRecord> run_task(const SystemConfig& campaign, double value,
                                  const std::string& algorithm, int sweep_idx, int algo_idx,
                                  int trial) {
  const SystemConfig cfg = trial_config(campaign, value);
  const std::uint64_t task_seed = Rng(campaign.seed)
                                      .derive(static_cast<std::uint64_t>(sweep_idx))
                                      .derive(static_cast<std::uint64_t>(algo_idx))
                                      .derive(static_cast<std::uint64_t>(trial))
                                      .next_u64();
  Rng rng(task_seed);

  const Scene scene = trial_scene(cfg, value, rng);
  const PathParams paths = path_params(scene);
  const GainVariances variances = path_gain_variances(scene);
  const GainRealization gains = sample_gains(variances, rng);
  const BeamWeights w0 = random_beam_weights(cfg, rng);
  const RisProfile theta0 = random_ris_profile(cfg, rng);

  const Eigen::VectorXcd clean = noiseless_stack(scene, paths, gains, w0, theta0, cfg);
  const double snr_db = cfg.snr_db.empty() ? 20.0 : cfg.snr_db.front();
  // The noise floor is anchored to the campaign's base array: on sweeps that
  // resize the RIS, the reference stack is re-synthesized at the base size so
  // a larger array raises the received energy instead of the noise with it.
  Eigen::VectorXcd reference = clean;
  if (cfg.n_ris != campaign.n_ris) {
    SystemConfig base_cfg = cfg;
    base_cfg.n_ris = campaign.n_ris;
    const RisProfile theta_ref = random_ris_profile(base_cfg, rng);
    reference = noiseless_stack(scene, paths, gains, w0, theta_ref, base_cfg);
  }
  const double sigma2 = reference.squaredNorm() / (static_cast<double>(std::max<Eigen::Index>(
                                                      1, reference.size())) *
                                                  std::pow(10.0, snr_db / 10.0));
  const Eigen::VectorXcd y0 = add_noise(clean, sigma2, rng);

  const Scene init_scene = perturb_scene(scene, cfg.init_radius_m, cfg.init_radius_rad, rng);
  const GainRealization init_gains = sample_gains(variances, rng);

  const auto start = std::chrono::steady_clock::now();
  const JlboState state = run_jlbo(y0, init_scene, init_gains, w0, theta0, variances, cfg,
                                   sigma2, SimulatorTruth{scene, gains}, policy_for(algorithm),
                                   rng);
  const double wall_ms =
      cfg.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             start)
                       .count()
                 : 0.0;

  std::vector<TrialRecord> out;
  out.reserve(state.history.size());
  for (const OuterIterate& oi : state.history) {
    TrialRecord rec;
    rec.trial = trial;
    rec.seed = task_seed;
    rec.sweep_value =
        (cfg.sweep == SweepAxis::kIterations) ? static_cast<double>(oi.iteration) : value;
    rec.iteration = oi.iteration;
    rec.algorithm = algorithm;
    rec.nmse_position = oi.nmse_position;
    rec.nmse_kappa = oi.nmse_kappa;
    rec.crlb_total = oi.crlb_total;
    rec.residual = oi.residual;
    rec.wall_ms = wall_ms;
    out.push_back(rec);
  }
  return out;
}

}  // namespace

double nmse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  const double denom = truth.squaredNorm();
  const double num = (estimate - truth).squaredNorm();
  if (denom == 0.0)
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / denom;
}

std::vector<TrialRecord> run_monte_carlo(const SystemConfig& cfg) {
  const std::vector<double> values = effective_sweep_values(cfg);
  std::vector<std::string> algorithms = {kAlgorithmJlbo};
  if (cfg.baseline_random) algorithms.push_back(kAlgorithmRandomBf);
  if (cfg.baseline_fixed_ris) algorithms.push_back(kAlgorithmFixedRis);
  std::sort(algorithms.begin(), algorithms.end());

  struct Task {
    int sweep_idx;
    int algo_idx;
    int trial;
  };
  std::vector<Task> tasks;
  for (int s = 0; s < static_cast<int>(values.size()); ++s)
    for (int a = 0; a < static_cast<int>(algorithms.size()); ++a)
      for (int t = 0; t < cfg.trials; ++t) tasks.push_back({s, a, t});

  std::vector<std::vector<TrialRecord>> per_task(tasks.size());
  const auto run_one = [&](std::size_t i) {
    const Task& tk = tasks[i];
    per_task[i] =
        run_task(cfg, values[tk.sweep_idx], algorithms[tk.algo_idx], tk.sweep_idx, tk.algo_idx,
                 tk.trial);
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int n_workers =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size()));
    for (int wkr = 0; wkr < n_workers; ++wkr)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            run_one(i);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<TrialRecord> records;
  for (const auto& chunk : per_task) records.insert(records.end(), chunk.begin(), chunk.end());
  std::stable_sort(records.begin(), records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
                     if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
                     if (a.trial != b.trial) return a.trial < b.trial;
                     return a.iteration < b.iteration;
                   });
  return records;
}

}  // namespace jlbo
