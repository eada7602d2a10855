#pragma once

#include <iosfwd>

namespace cade {

// Exit codes: 0 ok, 1 other failure (including a failed gradient check),
// 2 configuration error, 3 data error, 4 numeric abort.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cade
