#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carnot/cli/config.hpp"
#include "json.hpp"

namespace carnot::cli {

inline constexpr const char* kReportSchema = "carnot-report/1";

struct CommandResult {
  int exit_code = 0;
  nlohmann::ordered_json report;
  std::string csv;                   ///< empty when the command has no table
  std::vector<std::string> lines;    ///< human-readable summary
  std::optional<std::string> plain;  ///< replaces the JSON report (export)
};

const std::vector<std::string>& command_names();

/// Runs one command. Library errors propagate; map them with exit_code_for.
CommandResult run_command(const std::string& command, const RunConfig& config);

/// 2 for precondition and config errors, 3 for numerical failures, 4 for I/O.
int exit_code_for(const Error& error);

/// Two-space indented JSON with a trailing newline.
std::string render_report(const nlohmann::ordered_json& report);

}  // namespace carnot::cli
