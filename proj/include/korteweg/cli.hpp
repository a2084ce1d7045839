#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace korteweg::cli {

enum ExitCode : int {
  ok = 0,
  unexpected = 1,
  config_error = 2,
  solver_failure = 3,
  contract_violation = 4,
};

/// Runs one subcommand (cell, pore, effective, compare, check-pressure),
/// writing CSV/FIELD outputs and manifest.json into `out`. Errors are
/// reported on `err` and mapped to an exit code.
int run_command(const std::string& command, const std::filesystem::path& config, const std::filesystem::path& out,
                std::ostream& log, std::ostream& err);

/// Full argument parsing, as used by the korteweg executable.
int main(int argc, char** argv);

}  // namespace korteweg::cli
