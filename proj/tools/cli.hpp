#pragma once

#include <iosfwd>

namespace fxt::cli {

/// Exit codes: 0 all checks pass, 1 usage or runtime error, 2 a check failed.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fxt::cli
