#pragma once

#include <iosfwd>

namespace ledgerloop::cli {

inline constexpr int kOk = 0;
inline constexpr int kFindings = 1;
inline constexpr int kUsage = 2;

/// Entry point of the command-line tool; returns the process exit code.
int run(int argc, char** argv);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ledgerloop::cli
