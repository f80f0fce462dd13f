#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lawq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (args[0] is the program name) and returns the exit
// code.  Nothing is written to the filesystem unless the command succeeds.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lawq::cli
