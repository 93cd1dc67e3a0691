#include <iostream>

#include "p2ps/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return p2ps::run_cli(args, std::cout, std::cerr);
}
