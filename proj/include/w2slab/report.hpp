#pragma once

// Tabular results, pass/fail verdicts, and their CSV / JSON serializations.

#include "w2slab/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace w2slab {

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument when the row width differs from the header.
  void add(std::vector<Cell> row);
};

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  Table rows;
  std::vector<Verdict> verdicts;
  double duration_seconds = 0.0;

  bool all_passed() const;
};

/// RFC 4180 CSV with one header row; doubles printed with 17 significant digits,
/// empty cells for missing values.
std::string to_csv(const Table& t);
void write_csv(const Table& t, const std::filesystem::path& path);

/// Config echo with values typed by the schema.
nlohmann::json config_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const RunReport& r);
void write_json(const RunReport& r, const std::filesystem::path& path);

}  // namespace w2slab
