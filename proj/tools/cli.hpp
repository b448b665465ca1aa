#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ltest::cli
{

/// Exit codes: 0 success (whatever the statistical decision), 2 input or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;

/// Run the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ltest::cli
