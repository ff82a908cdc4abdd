#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdamimo {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitConfig = 2;

/// Parses "start:step:count" into count values.
std::vector<double> parse_range_spec(const std::string& spec);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace fdamimo
