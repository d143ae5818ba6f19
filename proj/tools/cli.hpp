#pragma once

#include <iosfwd>

namespace pwdyn {

// Exit codes: 0 success (negative scientific results included), 2 bad
// configuration or input, 3 computation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pwdyn
