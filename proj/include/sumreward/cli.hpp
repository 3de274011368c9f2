#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sumreward::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sumreward::cli
