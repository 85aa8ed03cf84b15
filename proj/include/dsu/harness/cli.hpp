#pragma once

#include <iosfwd>

namespace dsu::cli {

/// Entry point of the `dsu` tool. Summaries go to `out`, diagnostics and log
/// lines to `err`. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsu::cli
