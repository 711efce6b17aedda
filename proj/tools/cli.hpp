// Command-line front end: fit, score, curve and simulate.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sigfdr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNotConverged = 3;

/// Run the CLI on args (excluding the program name). Documents go to `out`
/// unless --out is given; diagnostics go to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace sigfdr::cli
