#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowbm::cli {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitThreshold = 2;

/// Full command line (args[0] is the program name). 0 when every check of
/// every report passes, 2 on a threshold failure, 1 on any error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowbm::cli
