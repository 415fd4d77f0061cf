#pragma once

#include <iosfwd>

namespace readop::cli {

/// Exit status: 0 success, 1 failed check or runtime error, 2 usage or configuration error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace readop::cli
