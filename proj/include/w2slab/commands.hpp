#pragma once

// The four experiment commands, their config schemas, and the CLI driver.

#include "w2slab/config.hpp"
#include "w2slab/report.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace w2slab {

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"verify", "ridge", "classify", "bias-variance"};
  return names;
}

/// Throws std::invalid_argument for an unknown command.
const Schema& command_schema(const std::string& command);

struct CommandOutput {
  RunReport report;
  Table csv;
};

/// Validates the whole configuration before any work starts (ConfigError on violation),
/// then runs the experiment. Verdict failures are reported, not thrown.
CommandOutput run_command(const std::string& command, const ExperimentConfig& cfg);

/// w2slab <command> [--config PATH] [--set key=value ...] --out DIR
/// Returns 0 when every verdict passes, 1 when one fails (or the run errors), 2 on invalid config.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace w2slab
