#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nonconc::cli {

enum ExitCode : int { ok = 0, internal_error = 1, invalid_input = 2, check_failed = 3 };

// Runs one command line (args[0] is the program name). Reports go to `out`
// (or the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nonconc::cli
