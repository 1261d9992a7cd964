#pragma once

#include <string>
#include <vector>

namespace spectronet::cli {

/// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric
/// divergence.
int run(const std::vector<std::string>& args);

} // namespace spectronet::cli
