// SPDX-License-Identifier: MIT
/// @file io.cpp
/// @brief Record emitters and file helpers.

#include "jlbo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace jlbo {
namespace {

constexpr const char* kCsvHeader =
    "trial,seed,sweep_value,iteration,algorithm,nmse_position,nmse_kappa,crlb_total,"
    "residual,wall_ms";

/// Shortest %.17g rendering: round-trips every finite double.
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error(std::string("csv: bad ") + what + " value '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const char* what) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error(std::string("csv: bad ") + what + " value '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error(std::string("csv: bad ") + what + " value '" + s + "'");
  return v;
}

}  // namespace

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const TrialRecord& r : records) {
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += format_double(r.sweep_value);
    out += ',';
    out += std::to_string(r.iteration);
    out += ',';
    out += r.algorithm;
    out += ',';
    out += format_double(r.nmse_position);
    out += ',';
    out += format_double(r.nmse_kappa);
    out += ',';
    out += format_double(r.crlb_total);
    out += ',';
    out += format_double(r.residual);
    out += ',';
    out += format_double(r.wall_ms);
    out += '\n';
  }
  return out;
}

std::vector<TrialRecord> records_from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw std::runtime_error("csv: missing or unexpected header");
  std::vector<TrialRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 10)
      throw std::runtime_error("csv: expected 10 fields, got " + std::to_string(f.size()));
    TrialRecord r;
    r.trial = static_cast<int>(parse_int(f[0], "trial"));
    r.seed = parse_u64(f[1], "seed");
    r.sweep_value = parse_double(f[2], "sweep_value");
    r.iteration = static_cast<int>(parse_int(f[3], "iteration"));
    r.algorithm = f[4];
    r.nmse_position = parse_double(f[5], "nmse_position");
    r.nmse_kappa = parse_double(f[6], "nmse_kappa");
    r.crlb_total = parse_double(f[7], "crlb_total");
    r.residual = parse_double(f[8], "residual");
    r.wall_ms = parse_double(f[9], "wall_ms");
    out.push_back(r);
  }
  return out;
}

std::string records_to_json(const std::vector<TrialRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TrialRecord& r : records) {
    arr.push_back({{"trial", r.trial},
                   {"seed", r.seed},
                   {"sweep_value", r.sweep_value},
                   {"iteration", r.iteration},
                   {"algorithm", r.algorithm},
                   {"nmse_position", r.nmse_position},
                   {"nmse_kappa", r.nmse_kappa},
                   {"crlb_total", r.crlb_total},
                   {"residual", r.residual},
                   {"wall_ms", r.wall_ms}});
  }
  return arr.dump(2) + "\n";
}

std::string records_to_svg(const std::vector<TrialRecord>& records, const std::string& title) {
  // Median final-iteration position NMSE per (algorithm, sweep value).
  std::map<std::string, std::map<double, std::map<int, TrialRecord>>> last;
  for (const TrialRecord& r : records) {
    auto& slot = last[r.algorithm][r.sweep_value];
    auto it = slot.find(r.trial);
    if (it == slot.end() || r.iteration >= it->second.iteration) slot[r.trial] = r;
  }
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double x_min = 0.0, x_max = 1.0, y_min = 1.0, y_max = 1.0;
  bool first = true;
  for (const auto& [algo, by_value] : last) {
    for (const auto& [value, trials] : by_value) {
      std::vector<double> v;
      v.reserve(trials.size());
      for (const auto& [trial, rec] : trials) v.push_back(rec.nmse_position);
      std::sort(v.begin(), v.end());
      if (v.empty()) continue;
      const double median = (v.size() % 2 == 1)
                                ? v[v.size() / 2]
                                : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
      const double y = std::max(median, 1e-300);  // log axis floor
      series[algo].push_back({value, y});
      if (first) {
        x_min = x_max = value;
        y_min = y_max = y;
        first = false;
      } else {
        x_min = std::min(x_min, value);
        x_max = std::max(x_max, value);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min * 10.0;
  const double lx0 = x_min, lx1 = x_max;
  const double ly0 = std::log10(y_min), ly1 = std::log10(y_max);

  const double width = 640.0, height = 400.0, margin = 60.0;
  const auto px = [&](double x) {
    return margin + (x - lx0) / (lx1 - lx0) * (width - 2.0 * margin);
  };
  const auto py = [&](double y) {
    return height - margin -
           (std::log10(y) - ly0) / (ly1 - ly0) * (height - 2.0 * margin);
  };

  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
     << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
     << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n"
     << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
     << width - margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
     << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
     << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
     << "  <text x=\"" << margin << "\" y=\"" << height - margin + 28
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
     << format_double(x_min) << "</text>\n"
     << "  <text x=\"" << width - margin << "\" y=\"" << height - margin + 28
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
     << format_double(x_max) << "</text>\n"
     << "  <text x=\"" << margin - 8 << "\" y=\"" << height - margin
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
     << format_double(ly0) << "</text>\n"
     << "  <text x=\"" << margin - 8 << "\" y=\"" << margin + 4
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
     << format_double(ly1) << "</text>\n";

  int color = 0;
  double legend_y = margin + 12.0;
  for (const auto& [algo, pts] : series) {
    const char* stroke = palette[color % 5];
    os << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    os << "  <text x=\"" << margin + 10 << "\" y=\"" << legend_y
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << stroke << "\">" << algo
       << "</text>\n";
    legend_y += 16.0;
    ++color;
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace jlbo
