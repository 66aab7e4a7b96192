#include <iostream>
#include <string>
#include <vector>

#include "combreg/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return combreg::run_command(args, std::cout, std::cerr);
}
