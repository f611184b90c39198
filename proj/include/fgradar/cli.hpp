#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fgradar::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kMissingInput = 2,
    kMalformedInput = 3,
    kCalibrationFailure = 4,
    kShapeMismatch = 5,
};

/// Runs one CLI invocation; args excludes the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace fgradar::cli
