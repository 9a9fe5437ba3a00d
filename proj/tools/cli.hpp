#pragma once

#include <iosfwd>

namespace hats::cli {

/// Exit codes: 0 success (including CLEAN detections), 1 I/O or validation
/// failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hats::cli
