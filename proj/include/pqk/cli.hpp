#pragma once

// Command-line front end. Exit codes: 0 pass, 1 verification failure
// (report still emitted), 2 malformed input or bad command line.

#include <ostream>
#include <string>
#include <vector>

namespace pqk::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kMalformed = 2 };

/// `args` excludes the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pqk::cli
