#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgmlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the command-line tool. `args` excludes the program name.
// Subcommands: gen-data, train, sample, measure-bias, evaluate, props, plot.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses flat "key = value" text ('#' starts a comment).
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

}  // namespace sgmlab::cli
