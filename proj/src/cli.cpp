#include "w2slab/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>

namespace w2slab {

namespace {

struct SubcommandArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

std::optional<std::string> env_seed() {
  if (const char* s = std::getenv("W2SLAB_SEED"); s && *s) return std::string(s);
  return std::nullopt;
}

int execute(const std::string& command, const SubcommandArgs& args, std::ostream& out, std::ostream& err) {
  CommandOutput result;
  try {
    const Entries file = args.config.empty() ? Entries{} : parse_config_file(args.config, command);
    Entries overrides;
    for (const auto& kv : args.overrides) overrides.push_back(parse_override(kv));
    const auto cfg = ExperimentConfig::resolve(command_schema(command), file, overrides, env_seed());
    result = run_command(command, cfg);
  } catch (const ConfigError& e) {
    err << "w2slab " << command << ": invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "w2slab " << command << ": " << e.what() << "\n";
    return 1;
  }

  try {
    const std::filesystem::path dir(args.out);
    std::filesystem::create_directories(dir);
    write_csv(result.csv, dir / (command + ".csv"));
    write_json(result.report, dir / (command + ".json"));
  } catch (const std::exception& e) {
    err << "w2slab " << command << ": " << e.what() << "\n";
    return 1;
  }

  for (const auto& v : result.report.verdicts)
    out << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
  out << command << ": " << result.csv.rows.size() << " rows in "
      << result.report.duration_seconds << " s, outputs in " << args.out << "\n";
  return result.report.all_passed() ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks of misfit-based weak-to-strong generalization bounds", "w2slab"};
  app.require_subcommand(1);
  std::map<std::string, SubcommandArgs> args;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    auto& a = args[name];
    sub->add_option("--config", a.config, "key=value config file; keys under [" + name + "] and outside sections")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", a.overrides, "override one key (repeatable)")->allow_extra_args(false);
    sub->add_option("--out", a.out, "output directory for " + name + ".csv and " + name + ".json")->required();
    sub->footer(describe_schema(command_schema(name)));
  }
  app.description(app.get_description() + "\nSubcommands: verify, ridge, classify, bias-variance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (const auto& name : command_names())
    if (app.got_subcommand(name)) return execute(name, args[name], out, err);
  return 2;
}

}  // namespace w2slab
