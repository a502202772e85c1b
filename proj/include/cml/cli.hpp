#pragma once

#include <ostream>

namespace cml::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kCycleFound = 2,
    kAssertionFailed = 3,
    kPreconditionViolated = 4,
};

// Entry point of the cmlab binary; usable in-process.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cml::cli
