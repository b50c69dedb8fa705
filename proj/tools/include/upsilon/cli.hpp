#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace upsilon {

// Exit codes of the command line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace upsilon
