#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rolekit::cli {

inline constexpr const char* kVersion = "0.1.0";

// Runs one command line (without the program name). Returns the process exit
// status: 0 success, 1 computation error, 2 usage or validation error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rolekit::cli
