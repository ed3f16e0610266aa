#pragma once

#include <string>
#include <vector>

namespace onebit {

/// Entry point for the `onebit` binary: args are argv[1..]. Returns the
/// process exit status; never throws (errors become messages on stderr and
/// a nonzero status).
int run_cli(const std::vector<std::string>& args);

}  // namespace onebit
