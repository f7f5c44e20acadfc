// SPDX-License-Identifier: MIT
/// @file io.hpp
/// @brief Emitters for trial records (CSV, JSON, SVG) and the round-trip
///        CSV reader used by tests.
#pragma once

#include <string>
#include <vector>

#include "jlbo/harness.hpp"

namespace jlbo {

/// CSV with the fixed header
/// trial,seed,sweep_value,iteration,algorithm,nmse_position,nmse_kappa,crlb_total,residual,wall_ms
/// and one row per record; floating-point fields printed with %.17g.
std::string records_to_csv(const std::vector<TrialRecord>& records);

/// Inverse of records_to_csv (header validated).
std::vector<TrialRecord> records_from_csv(const std::string& csv);

/// JSON array of objects with the same fields.
std::string records_to_json(const std::vector<TrialRecord>& records);

/// Log-scale polyline chart of median NMSE-vs-sweep-value per algorithm.
std::string records_to_svg(const std::vector<TrialRecord>& records, const std::string& title);

/// Writes content to path, creating parent directories.
void write_file(const std::string& path, const std::string& content);

/// Reads a whole file.
std::string read_file(const std::string& path);

}  // namespace jlbo
