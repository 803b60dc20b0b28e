#pragma once

#include <string>
#include <vector>

namespace covop {

// Runs one CLI invocation; returns the process exit code.
// 0 success, 1 configuration error, 2 numerical failure, 3 I/O failure.
int cli_run(const std::vector<std::string>& args);

}  // namespace covop
