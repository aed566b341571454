#pragma once

#include <string>
#include <vector>

namespace vtn {

/// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
int cli_main(int argc, const char* const* argv);
/// Same as above; args[0] is the program name.
int cli_main(const std::vector<std::string>& args);

}  // namespace vtn
