#ifndef UAML_TOOLS_CLI_HPP_
#define UAML_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace uaml::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Runs one command line (without the program name).  Structured output goes
// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uaml::cli

#endif  // UAML_TOOLS_CLI_HPP_
