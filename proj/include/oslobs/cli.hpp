#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "oslobs/report.hpp"

namespace oslobs {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitEstimation = 3,
  kExitStructural = 4,
  kExitNoAlpha = 5,
  kExitIntegration = 6,
  kExitMismatch = 7,
};

/// Runs the command line `args` (without the program name). The report goes
/// to `out`; warnings and diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// End-to-end reproduction of the planar limit-cycle example. Each row of
/// results.rows compares a computed value against the published one.
RunReport reproduce_example3(std::size_t pairs, std::uint64_t seed, bool& all_match);

}  // namespace oslobs
