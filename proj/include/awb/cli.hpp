#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace awb {

/// Exit codes: 0 analysis ran, 1 input error, 2 resource cap hit.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace awb
