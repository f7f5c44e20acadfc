// SPDX-License-Identifier: MIT
/// @file config.cpp
#include "jlbo/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace jlbo {

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kIterations: return "iterations";
    case SweepAxis::kNRis: return "n_ris";
    case SweepAxis::kSnr: return "snr";
    case SweepAxis::kBsRisDistance: return "bs_ris_distance";
  }
  return "iterations";
}

bool parse_sweep_axis(const std::string& text, SweepAxis* out) {
  if (text == "iterations") *out = SweepAxis::kIterations;
  else if (text == "n_ris") *out = SweepAxis::kNRis;
  else if (text == "snr") *out = SweepAxis::kSnr;
  else if (text == "bs_ris_distance") *out = SweepAxis::kBsRisDistance;
  else return false;
  return true;
}

SystemConfig desk_profile() {
  SystemConfig cfg;
  cfg.n_bs = 2;
  cfg.n_tx = 8;
  cfg.n_ue = 2;
  cfg.n_ris = 16;
  cfg.n_subcarriers_per_bs = 2;
  cfg.n_pilots = 4;
  cfg.n_paths_bs_ris = 2;
  cfg.n_paths_ris_ue = 2;
  cfg.trials = 50;
  cfg.init_radius_m = 1.0;
  cfg.init_radius_rad = 0.02;
  return cfg;
}

SystemConfig paper_profile() {
  SystemConfig cfg;
  cfg.n_bs = 5;
  cfg.n_tx = 64;
  cfg.n_ue = 4;
  cfg.n_ris = 64;
  cfg.n_subcarriers_per_bs = 2;
  cfg.n_pilots = 8;
  cfg.n_paths_bs_ris = 10;
  cfg.n_paths_ris_ue = 8;
  cfg.trials = 200;
  cfg.init_radius_m = 1.0;
  cfg.init_radius_rad = 0.02;
  return cfg;
}

SystemConfig profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  throw std::runtime_error("unknown profile: " + name + " (expected desk or paper)");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_list(const std::string& value, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::runtime_error("config key " + key + ": bad number '" + item + "'");
    }
  }
  return out;
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": bad number '" + value + "'");
  }
}

int parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": bad integer '" + value + "'");
  }
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::runtime_error("config key " + key + ": bad boolean '" + value + "'");
}

}  // namespace

SystemConfig parse_config_text(const std::string& text, SystemConfig cfg) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "profile") cfg = profile_by_name(value);
    else if (key == "n_bs") cfg.n_bs = parse_int(value, key);
    else if (key == "n_tx") cfg.n_tx = parse_int(value, key);
    else if (key == "n_ue") cfg.n_ue = parse_int(value, key);
    else if (key == "n_ris") cfg.n_ris = parse_int(value, key);
    else if (key == "n_subcarriers_per_bs") cfg.n_subcarriers_per_bs = parse_int(value, key);
    else if (key == "n_pilots") cfg.n_pilots = parse_int(value, key);
    else if (key == "n_paths_bs_ris") cfg.n_paths_bs_ris = parse_int(value, key);
    else if (key == "n_paths_ris_ue") cfg.n_paths_ris_ue = parse_int(value, key);
    else if (key == "carrier_hz") cfg.carrier_hz = parse_double(value, key);
    else if (key == "sample_period_s") cfg.sample_period_s = parse_double(value, key);
    else if (key == "region_m") cfg.region_m = parse_double(value, key);
    else if (key == "light_speed") cfg.light_speed = parse_double(value, key);
    else if (key == "min_separation_m") cfg.min_separation_m = parse_double(value, key);
    else if (key == "steering_phase_factor") cfg.steering_phase_factor = parse_double(value, key);
    else if (key == "snr_db") cfg.snr_db = parse_list(value, key);
    else if (key == "trials") cfg.trials = parse_int(value, key);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "sweep") {
      if (!parse_sweep_axis(value, &cfg.sweep))
        throw std::runtime_error("config key sweep: unknown axis '" + value + "'");
    } else if (key == "sweep_values") cfg.sweep_values = parse_list(value, key);
    else if (key == "init_radius_m") cfg.init_radius_m = parse_double(value, key);
    else if (key == "init_radius_rad") cfg.init_radius_rad = parse_double(value, key);
    else if (key == "max_outer_iterations") cfg.max_outer_iterations = parse_int(value, key);
    else if (key == "outer_tolerance") cfg.outer_tolerance = parse_double(value, key);
    else if (key == "max_location_iterations")
      cfg.max_location_iterations = parse_int(value, key);
    else if (key == "location_tolerance") cfg.location_tolerance = parse_double(value, key);
    else if (key == "location_steps_per_outer")
      cfg.location_steps_per_outer = parse_int(value, key);
    else if (key == "location_damping") cfg.location_damping = parse_double(value, key);
    else if (key == "location_trust_radius")
      cfg.location_trust_radius = parse_double(value, key);
    else if (key == "location_gain_refit")
      cfg.location_gain_refit = parse_bool(value, key);
    else if (key == "beamformer_rounds") cfg.beamformer_rounds = parse_int(value, key);
    else if (key == "diagonal_preconditioner")
      cfg.diagonal_preconditioner = parse_bool(value, key);
    else if (key == "baseline_random") cfg.baseline_random = parse_bool(value, key);
    else if (key == "baseline_fixed_ris") cfg.baseline_fixed_ris = parse_bool(value, key);
    else if (key == "assumption_warn_only") cfg.assumption_warn_only = parse_bool(value, key);
    else if (key == "timing") cfg.timing = parse_bool(value, key);
    else if (key == "jobs") cfg.jobs = parse_int(value, key);
    else throw std::runtime_error("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
  }
  return cfg;
}

SystemConfig load_config_file(const std::string& path, SystemConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), std::move(base));
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(values[i]);
  }
  return out;
}

}  // namespace

std::string config_to_text(const SystemConfig& cfg) {
  std::ostringstream out;
  out << "n_bs = " << cfg.n_bs << "\n";
  out << "n_tx = " << cfg.n_tx << "\n";
  out << "n_ue = " << cfg.n_ue << "\n";
  out << "n_ris = " << cfg.n_ris << "\n";
  out << "n_subcarriers_per_bs = " << cfg.n_subcarriers_per_bs << "\n";
  out << "n_pilots = " << cfg.n_pilots << "\n";
  out << "n_paths_bs_ris = " << cfg.n_paths_bs_ris << "\n";
  out << "n_paths_ris_ue = " << cfg.n_paths_ris_ue << "\n";
  out << "carrier_hz = " << fmt_double(cfg.carrier_hz) << "\n";
  out << "sample_period_s = " << fmt_double(cfg.sample_period_s) << "\n";
  out << "region_m = " << fmt_double(cfg.region_m) << "\n";
  out << "light_speed = " << fmt_double(cfg.light_speed) << "\n";
  out << "min_separation_m = " << fmt_double(cfg.min_separation_m) << "\n";
  out << "steering_phase_factor = " << fmt_double(cfg.steering_phase_factor) << "\n";
  out << "snr_db = " << fmt_list(cfg.snr_db) << "\n";
  out << "trials = " << cfg.trials << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "sweep = " << sweep_axis_name(cfg.sweep) << "\n";
  if (!cfg.sweep_values.empty()) out << "sweep_values = " << fmt_list(cfg.sweep_values) << "\n";
  out << "init_radius_m = " << fmt_double(cfg.init_radius_m) << "\n";
  out << "init_radius_rad = " << fmt_double(cfg.init_radius_rad) << "\n";
  out << "max_outer_iterations = " << cfg.max_outer_iterations << "\n";
  out << "outer_tolerance = " << fmt_double(cfg.outer_tolerance) << "\n";
  out << "max_location_iterations = " << cfg.max_location_iterations << "\n";
  out << "location_tolerance = " << fmt_double(cfg.location_tolerance) << "\n";
  out << "location_steps_per_outer = " << cfg.location_steps_per_outer << "\n";
  out << "location_damping = " << fmt_double(cfg.location_damping) << "\n";
  out << "location_trust_radius = " << fmt_double(cfg.location_trust_radius) << "\n";
  out << "location_gain_refit = " << (cfg.location_gain_refit ? "true" : "false") << "\n";
  out << "beamformer_rounds = " << cfg.beamformer_rounds << "\n";
  out << "diagonal_preconditioner = " << (cfg.diagonal_preconditioner ? "true" : "false")
      << "\n";
  out << "baseline_random = " << (cfg.baseline_random ? "true" : "false") << "\n";
  out << "baseline_fixed_ris = " << (cfg.baseline_fixed_ris ? "true" : "false") << "\n";
  out << "assumption_warn_only = " << (cfg.assumption_warn_only ? "true" : "false") << "\n";
  out << "timing = " << (cfg.timing ? "true" : "false") << "\n";
  out << "jobs = " << cfg.jobs << "\n";
  return out.str();
}

}  // namespace jlbo
