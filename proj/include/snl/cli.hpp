#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snl::cli {

// Runs the `snl` command line (args exclude the program name). Returns the
// exit code: 0 success, 1 input error, 2 numerical failure. Failures print a
// one-line JSON object on `err`. A path of "-" means `in` / `out`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace snl::cli
