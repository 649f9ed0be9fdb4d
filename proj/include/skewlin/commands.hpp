#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "skewlin/config.hpp"

namespace skewlin {

enum ExitCode : int { kExitSuccess = 0, kExitUsage = 1, kExitHypothesis = 2, kExitConvergence = 3 };

/// Commands accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one command: human-readable lines go to `out`, errors to `err`, and
/// CSV tables plus summary.json to config.out_dir. Library exceptions are
/// mapped to exit codes: InvalidArgument 1, HypothesisError 2, ConvergenceError 3.
int run_command(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace skewlin
