#pragma once

namespace cacl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Subcommands: gen-synth, schedule, cluster, train, eval, run-all.
int run(int argc, const char* const* argv);

}  // namespace cacl::cli
