#include <iostream>
#include <string>
#include <vector>

#include "oslobs/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return oslobs::run_cli(args, std::cout, std::cerr);
}
