#pragma once

#include <iosfwd>

namespace seamcam::cli {

/// Dispatches a command line. Returns 0 on success, 1 on a runtime failure
/// (an `error: code=<Code> ...` line goes to `err`), 2 on a usage error.
int run(int argc, char **argv, std::ostream &out, std::ostream &err);

}  // namespace seamcam::cli
