#include <iostream>
#include <string>
#include <vector>

#include "glmebic/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return glmebic::run_cli(args, std::cout, std::cerr);
}
