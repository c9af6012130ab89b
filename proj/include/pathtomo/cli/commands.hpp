#pragma once
// Command-line front end.
//
// Exit codes: 0 success, 2 usage error, 3 data or validation error,
// 4 optimizer did not converge.

#include <iosfwd>
#include <string>
#include <vector>

namespace pathtomo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitConvergence = 4;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// "a:b:s" (inclusive range) or a comma-separated list, in degrees.
std::vector<double> parse_angles(const std::string& spec);

}  // namespace pathtomo::cli
