#include "w2slab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <fstream>
#include <sstream>

namespace w2slab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty element in list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("key '" + key + "': '" + s + "' is not a finite number");
  return v;
}

long long parse_integer(const std::string& key, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("key '" + key + "': '" + s + "' is not a non-negative integer");
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError("key '" + key + "': '" + s + "' is out of range");
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
}

void check_value(const KeySpec& spec, const std::string& v) {
  switch (spec.type) {
    case ValueType::Int: {
      const auto i = parse_integer(spec.name, v);
      if (i < INT32_MIN || i > INT32_MAX) throw ConfigError("key '" + spec.name + "' is out of range");
      break;
    }
    case ValueType::UInt64: parse_unsigned(spec.name, v); break;
    case ValueType::Double: parse_double(spec.name, v); break;
    case ValueType::Bool: parse_bool(spec.name, v); break;
    case ValueType::String: break;
    case ValueType::DoubleList:
      for (const auto& item : split_list(v)) parse_double(spec.name, item);
      break;
    case ValueType::StringList: split_list(v); break;
  }
}

}  // namespace

std::string to_string(ValueType t) {
  switch (t) {
    case ValueType::Int: return "int";
    case ValueType::UInt64: return "uint64";
    case ValueType::Double: return "double";
    case ValueType::Bool: return "bool";
    case ValueType::String: return "string";
    case ValueType::DoubleList: return "list<double>";
    case ValueType::StringList: return "list<string>";
  }
  return "?";
}

Entries parse_config_text(const std::string& text, const std::string& section) {
  Entries out;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!current.empty() && current != section) continue;
    for (const auto& [k, v] : out)
      if (k == key) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

Entries parse_config_file(const std::filesystem::path& path, const std::string& section) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), section);
}

std::pair<std::string, std::string> parse_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || trim(kv.substr(0, eq)).empty())
    throw ConfigError("override '" + kv + "' is not of the form key=value");
  return {trim(kv.substr(0, eq)), trim(kv.substr(eq + 1))};
}

ExperimentConfig ExperimentConfig::resolve(const Schema& schema, const Entries& file, const Entries& overrides,
                                           const std::optional<std::string>& env_seed) {
  ExperimentConfig c;
  c.schema_ = schema;
  for (const auto& s : schema) c.values_[s.name] = s.default_value;
  auto apply = [&](const std::string& key, const std::string& value, const std::string& origin) {
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& s) { return s.name == key; });
    if (it == schema.end()) throw ConfigError("unknown key '" + key + "' (" + origin + ")");
    check_value(*it, value);
    c.values_[key] = value;
  };
  for (const auto& [k, v] : file) apply(k, v, "config file");
  if (env_seed && c.values_.count("seed")) apply("seed", trim(*env_seed), "W2SLAB_SEED");
  for (const auto& [k, v] : overrides) apply(k, v, "--set");
  return c;
}

const KeySpec& ExperimentConfig::spec(const std::string& key, ValueType expected) const {
  for (const auto& s : schema_)
    if (s.name == key) {
      if (s.type != expected) throw std::logic_error("key '" + key + "' read with the wrong type");
      return s;
    }
  throw std::logic_error("key '" + key + "' is not in the schema");
}

int ExperimentConfig::get_int(const std::string& key) const {
  spec(key, ValueType::Int);
  return static_cast<int>(parse_integer(key, values_.at(key)));
}

std::uint64_t ExperimentConfig::get_uint64(const std::string& key) const {
  spec(key, ValueType::UInt64);
  return parse_unsigned(key, values_.at(key));
}

double ExperimentConfig::get_double(const std::string& key) const {
  spec(key, ValueType::Double);
  return parse_double(key, values_.at(key));
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  spec(key, ValueType::Bool);
  return parse_bool(key, values_.at(key));
}

const std::string& ExperimentConfig::get_string(const std::string& key) const {
  spec(key, ValueType::String);
  return values_.at(key);
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  spec(key, ValueType::DoubleList);
  std::vector<double> out;
  for (const auto& item : split_list(values_.at(key))) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::string> ExperimentConfig::get_strings(const std::string& key) const {
  spec(key, ValueType::StringList);
  return split_list(values_.at(key));
}

Entries ExperimentConfig::effective() const {
  Entries out;
  for (const auto& s : schema_) out.emplace_back(s.name, values_.at(s.name));
  return out;
}

std::string describe_schema(const Schema& schema) {
  std::size_t width = 0;
  for (const auto& s : schema) width = std::max(width, s.name.size());
  std::ostringstream out;
  out << "Config keys (file or --set key=value):\n";
  for (const auto& s : schema) {
    out << "  " << s.name << std::string(width - s.name.size() + 2, ' ') << "[" << to_string(s.type)
        << ", default " << (s.default_value.empty() ? "<empty>" : s.default_value) << "]  " << s.help << "\n";
  }
  out << "W2SLAB_SEED overrides 'seed' from the file; --set seed=... overrides both.\n";
  return out.str();
}

}  // namespace w2slab
