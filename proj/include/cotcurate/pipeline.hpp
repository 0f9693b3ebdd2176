#pragma once

#include <ostream>

namespace cotcurate {

// Entry point of the `cotcurate` command. Returns the process exit code; errors are reported
// on `err` as a single JSON line {"error", "code", "message"}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cotcurate
