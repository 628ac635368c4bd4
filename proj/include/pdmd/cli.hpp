#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace pdmd {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_computation = 1, exit_usage = 2 };

/// Runs the `pdmd` command line; argv[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Inclusive label lists: "a..b", "a", or comma-separated combinations.
std::vector<std::int64_t> parse_label_list(const std::string& text);

}  // namespace pdmd
