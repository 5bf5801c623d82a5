#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deim::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Runs one command line (args[0] is the program name). Reports go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Output root for runs without an explicit out_dir: $DEIM_OUTPUT_ROOT or "runs".
std::string output_root();

}  // namespace deim::cli
