#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absqm/error.hpp"

namespace absqm {

enum class LogLevel { quiet, info, debug };

struct RunRequest {
  std::string command;
  // Empty: built-in defaults.
  std::string config_path;
  std::string out_dir;
  // Overrides the config's top-level "seed".
  std::optional<std::uint64_t> seed;
  LogLevel log_level = LogLevel::info;
};

struct AssertionResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  // value <= limit when true, value >= limit otherwise.
  bool upper = true;
  // Distance to the limit, negative on failure.
  double margin = 0.0;
  bool pass = false;
};

AssertionResult at_most(std::string name, double value, double limit);
AssertionResult at_least(std::string name, double value, double limit);

struct RunOutcome {
  // 0 pass, 2 config or io error, 3 assertion failure, 4 numerical failure.
  int exit_code = 0;
  std::string message;
  std::vector<AssertionResult> assertions;
  std::vector<std::string> files;
};

const std::vector<std::string>& command_names();

int exit_code_for(ErrorKind kind) noexcept;

// Runs one command and writes its artifacts into out_dir: the command's CSV
// files, report.json (every assertion with its margin) and manifest.json.
// Never throws; failures land in exit_code and message.
RunOutcome run(const RunRequest& request);

}  // namespace absqm
