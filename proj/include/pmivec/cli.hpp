#pragma once

#include <string>
#include <vector>

namespace pmivec {

// Runs one CLI invocation (args exclude the program name). Returns the
// process exit status: 0 success, 2 usage, 3 io, 4 parse, 5 domain, 6 train.
int run_cli(const std::vector<std::string>& args);

}  // namespace pmivec
