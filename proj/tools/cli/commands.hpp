#pragma once

#include <iosfwd>

namespace hlgym::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_user = 2;
inline constexpr int exit_environment = 3;
inline constexpr int exit_partial = 4;

// Parses argv, runs one subcommand and returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Asks a running serve-hw or serve-env to shut down, as SIGINT does.
void request_stop();

}  // namespace hlgym::cli
