#pragma once

#include <string>
#include <vector>

namespace fact5w::cli {

/// Entry point behind the fact5w binary. Returns the process exit code:
/// 0 success, 2 config error, 3 data error, 4 numeric error, 1 unexpected.
int run(const std::vector<std::string>& args);

} // namespace fact5w::cli
