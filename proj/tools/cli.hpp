#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace cosseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand (gen, train, segment, evaluate, bench, sweep).
/// args excludes the program name. Messages go to out/err; returns the exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace cosseg::cli
