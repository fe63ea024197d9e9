#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace polybridge::cli {

// Runs one invocation (args excludes the program name) and returns the
// process exit code.  Normal output goes to out, diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polybridge::cli
