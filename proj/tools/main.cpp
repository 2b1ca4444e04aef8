#include <iostream>
#include <string>
#include <vector>

#include "mtsplan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mtsplan::run_cli(args, std::cout, std::cerr);
}
