#pragma once

// Flat key=value experiment configuration with [section] headers per command,
// typed schemas, command-line overrides and the W2SLAB_SEED environment override.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace w2slab {

/// Any schema violation; the CLI maps it to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ValueType { Int, UInt64, Double, Bool, String, DoubleList, StringList };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string help;
};

using Schema = std::vector<KeySpec>;
using Entries = std::vector<std::pair<std::string, std::string>>;

/// Keys outside any section plus those under [section]; other sections are skipped.
/// Blank lines and lines starting with '#' or ';' are ignored.
Entries parse_config_text(const std::string& text, const std::string& section);
Entries parse_config_file(const std::filesystem::path& path, const std::string& section);

/// Splits "key=value"; throws ConfigError when there is no '='.
std::pair<std::string, std::string> parse_override(const std::string& kv);

class ExperimentConfig {
 public:
  /// Precedence, lowest first: schema defaults, file entries, W2SLAB_SEED, --set overrides.
  /// Every value is parsed against the schema here, so typed getters never fail on content.
  static ExperimentConfig resolve(const Schema& schema, const Entries& file, const Entries& overrides,
                                  const std::optional<std::string>& env_seed);

  int get_int(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  const Schema& schema() const { return schema_; }
  /// Effective (key, raw value) pairs in schema order.
  Entries effective() const;

 private:
  const KeySpec& spec(const std::string& key, ValueType expected) const;

  Schema schema_;
  std::map<std::string, std::string> values_;
};

/// One line per key: name, type, default and description; used for --help.
std::string describe_schema(const Schema& schema);

std::string to_string(ValueType t);

}  // namespace w2slab
