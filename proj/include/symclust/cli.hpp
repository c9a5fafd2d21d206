#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace symclust::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kImpossibleEvidence = 3,  ///< also numerical breakdown of an evaluation
  kCapExceeded = 4,
  kOracleMismatch = 5,
};

/// Runs one command line (arguments after the program name). Results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace symclust::cli
