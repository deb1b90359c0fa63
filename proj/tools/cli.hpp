#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bdar::cli {

enum ExitCode : int { kOk = 0, kExperimentFailure = 1, kUsage = 2, kResourceGuard = 3 };

/// Entry point shared by the executable and the tests. args excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bdar::cli
