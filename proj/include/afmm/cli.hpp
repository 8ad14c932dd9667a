#pragma once

// Subcommand dispatch for the afmm tool. Exit codes: 0 success, 1 usage or
// configuration error, 2 data error, 3 numerical error.

#include <string>
#include <vector>

namespace afmm::cli {

inline constexpr const char* kToolVersion = "0.1.0";

int dispatch(const std::vector<std::string>& args);

} // namespace afmm::cli
