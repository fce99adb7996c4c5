#pragma once

#include <iosfwd>

namespace quadvp {

/// Exit codes: 0 success, 2 a predicate failed, 1 error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace quadvp
