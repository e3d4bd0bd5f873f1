#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hitctl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitIo = 4;

/// Runs one command line (without the program name). The report goes to
/// `out`, diagnostics to `err`. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hitctl::cli
