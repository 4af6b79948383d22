#pragma once

#include <iosfwd>

namespace ghfm {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point of the `ghfm` command. Returns 0 on success, 2 on usage or
/// input-schema errors, 1 on numeric failures. Errors are reported on `err`
/// as a single JSON line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ghfm
