#include "w2slab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace w2slab {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
  } visit;
  return std::visit(visit, c);
}

nlohmann::json cell_json(const Cell& c) {
  struct {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(double v) const { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v)); }
    nlohmann::json operator()(const std::string& s) const { return s; }
  } visit;
  return std::visit(visit, c);
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != header.size()) throw std::invalid_argument("row width differs from the header");
  rows.push_back(std::move(row));
}

bool RunReport::all_passed() const {
  for (const auto& v : verdicts)
    if (!v.passed) return false;
  return true;
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<Cell>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  std::vector<Cell> header(t.header.begin(), t.header.end());
  line(header);
  for (const auto& r : t.rows) line(r);
  return out;
}

void write_csv(const Table& t, const std::filesystem::path& path) { write_text(to_csv(t), path); }

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& s : cfg.schema()) {
    switch (s.type) {
      case ValueType::Int: j[s.name] = cfg.get_int(s.name); break;
      case ValueType::UInt64: j[s.name] = cfg.get_uint64(s.name); break;
      case ValueType::Double: j[s.name] = cfg.get_double(s.name); break;
      case ValueType::Bool: j[s.name] = cfg.get_bool(s.name); break;
      case ValueType::String: j[s.name] = cfg.get_string(s.name); break;
      case ValueType::DoubleList: j[s.name] = cfg.get_doubles(s.name); break;
      case ValueType::StringList: j[s.name] = cfg.get_strings(s.name); break;
    }
  }
  return j;
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows.rows) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) o[r.rows.header[i]] = cell_json(row[i]);
    rows.push_back(std::move(o));
  }
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts) verdicts.push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
  nlohmann::json cfg = r.config;
  cfg["command"] = r.command;
  return {{"config", cfg}, {"rows", rows}, {"verdicts", verdicts}, {"duration_seconds", r.duration_seconds}};
}

void write_json(const RunReport& r, const std::filesystem::path& path) { write_text(to_json(r).dump(2) + "\n", path); }

}  // namespace w2slab
