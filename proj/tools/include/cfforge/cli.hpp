#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cf {

// Exit codes: 0 ok, 1 usage or malformed input, 2 validation/precondition failure, 3 resource cap.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cf
