#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace privsub::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kRuntime = 3 };

// Runs one CLI invocation; args excludes the program name. The JSON report goes to out,
// diagnostics to err. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace privsub::cli
