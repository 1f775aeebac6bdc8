// npca-sim command line: analytic, simulate, sweep, validate, preset.
#pragma once

#include <iosfwd>

namespace npca {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation. Normal output goes to `out`, diagnostics to `err`.
/// Reads NPCA_SIM_SEED as the seed fallback.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace npca
