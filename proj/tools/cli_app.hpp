#ifndef EHC_TOOLS_CLI_APP_HPP
#define EHC_TOOLS_CLI_APP_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ehc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kDomain = 3;

// Runs the `ehc` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ehc::cli

#endif  // EHC_TOOLS_CLI_APP_HPP
