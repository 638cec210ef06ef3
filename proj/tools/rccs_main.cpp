#include <iostream>
#include <string>
#include <vector>

#include "rccs/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rccs::cli_main(std::move(args), std::cout, std::cerr);
}
