#ifndef STABMOR_TOOLS_CLI_HPP
#define STABMOR_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace stabmor::cli {

enum ExitCode { kOk = 0, kUsage = 2, kNumerical = 3 };

// Runs one stabmor invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "1,2,5", "1:20" and "2:20:2" items, comma separated, in the given order.
std::vector<long> parse_r_list(const std::string& text);

}  // namespace stabmor::cli

#endif  // STABMOR_TOOLS_CLI_HPP
