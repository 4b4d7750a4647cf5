#pragma once

#include <iosfwd>

namespace retv {

// Full command-line entry point (parse + dispatch).  Streams are injected so
// tests can capture output.  Returns the process exit code:
//   0 success, 1 usage error, 2 file I/O error, 3 numeric/solver failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace retv
