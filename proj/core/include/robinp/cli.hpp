#pragma once

#include <iosfwd>

namespace robinp {

/// Entry point of the `robinp` tool. Subcommands: eigen, solve-aux, continue,
/// check-f, picone.
///
/// Returns 0 on success, 1 on a solver or hypothesis failure, 2 on usage or
/// configuration errors. The output directory (config `output.directory`,
/// overridden by ROBINP_OUTPUT_DIR, overridden by --output) receives every
/// numeric result and a run.log.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace robinp
