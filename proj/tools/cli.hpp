#pragma once

#include <iosfwd>

namespace oxicopd {

/// Entry point of the `oxicopd` command. Returns the process exit status:
/// 0 on success, nonzero iff an error was reported on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace oxicopd
