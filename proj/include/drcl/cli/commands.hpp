#pragma once

#include <iosfwd>

namespace drcl::cli {

/// Dispatches `drcl <subcommand> ...`. Returns 0 on success, 1 on bad input
/// or usage, 2 on numerical failure. Normal output goes to `out`, usage and
/// diagnostics to `err`.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace drcl::cli
