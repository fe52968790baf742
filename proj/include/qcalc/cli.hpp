#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcalc::cli {

// Parses and executes one command (args exclude the program name), writing the
// report to `out` and diagnostics to `err`.  Returns the process exit code:
// 0 success, 1 usage error, 2 domain/evaluation error, 3 non-convergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcalc::cli
