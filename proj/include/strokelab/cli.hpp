#pragma once

#include <string>
#include <vector>

namespace strokelab {

/// Runs one command line (without the program name). Returns the process
/// exit status: 0 on success, otherwise exit_code() of the failure class.
int run_cli(const std::vector<std::string>& args);

}  // namespace strokelab
