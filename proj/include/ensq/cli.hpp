// cli.hpp — scenario runner: params | spectrum | stabilize | rabi | broadening.

#pragma once

#include <iosfwd>

namespace ensq::cli {

// Exit codes: 0 ok, 2 config error, 3 physics/runtime guard, 4 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ensq::cli
