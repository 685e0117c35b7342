#include <iostream>

#include "awb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return awb::run_cli(args, std::cout, std::cerr);
}
