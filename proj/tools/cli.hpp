#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace liftcurve::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;

// Runs one command line (args[0] is the program name). Never throws; errors
// are reported on `err` and mapped to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace liftcurve::cli
