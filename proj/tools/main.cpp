#include <iostream>
#include <string>
#include <vector>

#include "snl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return snl::cli::run(args, std::cin, std::cout, std::cerr);
}
