#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hdp::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

const char* version();

/// Runs one command line (args[0] is the program name). Metrics and JSONL go
/// to `out`, diagnostics to `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdp::cli
