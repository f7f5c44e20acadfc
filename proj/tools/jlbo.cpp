// SPDX-License-Identifier: MIT
/// @file jlbo.cpp
/// @brief Command-line Monte Carlo harness around the simulation library.
///
/// Exit codes: 0 on success, 2 when the pilot-dimension / rank assumptions
/// reject the configuration (unless assumption_warn_only), 1 on any error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jlbo/config.hpp"
#include "jlbo/driver.hpp"
#include "jlbo/harness.hpp"
#include "jlbo/io.hpp"

namespace {

int run_command(jlbo::SystemConfig cfg, const std::string& out_path,
                const std::string& format) {
  // Probe instance at the campaign seed: refuse configurations whose pilot
  // stack cannot identify the unknowns.
  jlbo::Rng probe_rng(cfg.seed);
  const jlbo::Scene scene = jlbo::sample_scene(cfg, probe_rng);
  const jlbo::GainVariances variances = jlbo::path_gain_variances(scene);
  const jlbo::GainRealization gains = jlbo::sample_gains(variances, probe_rng);
  const jlbo::BeamWeights weights = jlbo::random_beam_weights(cfg, probe_rng);
  const jlbo::RisProfile theta = jlbo::random_ris_profile(cfg, probe_rng);
  const jlbo::AssumptionReport report =
      jlbo::validate_assumptions(scene, gains, weights, theta, cfg);
  if (!report.ok()) {
    for (const std::string& note : report.notes) std::cerr << "assumption check: " << note << '\n';
    if (!cfg.assumption_warn_only) {
      std::cerr << "refusing to run (set assumption_warn_only = true to override)\n";
      return 2;
    }
    std::cerr << "assumption_warn_only set: continuing anyway\n";
  }

  const std::vector<jlbo::TrialRecord> records = jlbo::run_monte_carlo(cfg);

  std::string content;
  if (format == "csv") {
    content = jlbo::records_to_csv(records);
  } else if (format == "json") {
    content = jlbo::records_to_json(records);
  } else if (format == "svg") {
    std::ostringstream title;
    title << "median position NMSE vs " << jlbo::sweep_axis_name(cfg.sweep);
    content = jlbo::records_to_svg(records, title.str());
  } else {
    std::cerr << "unknown format '" << format << "'\n";
    return 1;
  }
  jlbo::write_file(out_path, content);
  std::cout << records.size() << " records -> " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint localization and beamforming Monte Carlo harness"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run a sweep campaign and write records");
  std::string config_path;
  std::string profile = "desk";
  std::string sweep_name;
  std::string out_path;
  std::string format = "csv";
  std::string baselines;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = -1;
  run->add_option("--config", config_path, "key = value config file applied over the profile");
  run->add_option("--profile", profile, "base profile: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  run->add_option("--seed", seed, "campaign seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--sweep", sweep_name,
                  "sweep axis: iterations, n_ris, snr, or bs_ris_distance");
  run->add_option("--trials", trials, "Monte Carlo trials per sweep value");
  run->add_option("--out", out_path, "output path")->required();
  run->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  run->add_option("--baseline", baselines,
                  "comma-separated baselines: random, fixed-ris");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    jlbo::SystemConfig cfg = jlbo::profile_by_name(profile);
    if (!config_path.empty()) cfg = jlbo::load_config_file(config_path, cfg);
    if (seed_set) cfg.seed = seed;
    if (trials >= 0) cfg.trials = trials;
    if (!sweep_name.empty() && !jlbo::parse_sweep_axis(sweep_name, &cfg.sweep)) {
      std::cerr << "unknown sweep axis '" << sweep_name << "'\n";
      return 1;
    }
    if (!baselines.empty()) {
      std::istringstream is(baselines);
      std::string token;
      while (std::getline(is, token, ',')) {
        if (token == "random") cfg.baseline_random = true;
        else if (token == "fixed-ris") cfg.baseline_fixed_ris = true;
        else {
          std::cerr << "unknown baseline '" << token << "'\n";
          return 1;
        }
      }
    }
    return run_command(cfg, out_path, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
