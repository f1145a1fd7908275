#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "carnot/cli/commands.hpp"

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw carnot::IoError("cannot write '" + path + "'");
  out << content;
  if (!out.flush()) throw carnot::IoError("write to '" + path + "' failed");
}

int run(const std::string& command, const std::string& config_path, const std::optional<std::int64_t>& seed,
        std::string output, std::string format, bool quiet) {
  using namespace carnot::cli;
  RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
  if (seed) config.set("seed", std::to_string(*seed));
  if (output.empty()) output = config.text_or("output", "");
  if (format.empty()) format = config.text_or("format", "json");
  if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");

  const CommandResult result = run_command(command, config);
  std::string body;
  if (result.plain) {
    body = *result.plain;
  } else if (format == "csv") {
    if (result.csv.empty()) throw ConfigError("command '" + command + "' has no CSV table");
    body = result.csv;
  } else {
    body = render_report(result.report);
  }

  std::ostream& summary = output.empty() ? std::cerr : std::cout;
  if (output.empty()) std::cout << body;
  else write_file(output, body);
  if (!quiet)
    for (const auto& line : result.lines) summary << line << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carnot group submanifold analysis"};
  std::string command, config_path, output, format;
  std::optional<std::int64_t> seed;
  bool quiet = false;
  app.add_option("command", command, "validate-group, bch, degree, strata, measure, metric-factor, blowup, curves, engel-suite or export")
      ->required()
      ->check(CLI::IsMember(carnot::cli::command_names()));
  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--output", output, "write the report here instead of stdout");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--quiet", quiet, "suppress the summary lines");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run(command, config_path, seed, output, format, quiet);
  } catch (const carnot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return carnot::cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
