#include <iostream>
#include <string>
#include <vector>

#include "qgc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qgc::cli::run(args, std::cout, std::cerr);
}
