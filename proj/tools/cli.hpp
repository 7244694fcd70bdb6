#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dgn::cli {

/// Exit codes: 0 success, 1 validation or usage error, 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dgn::cli
