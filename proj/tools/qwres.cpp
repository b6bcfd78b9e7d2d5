#include <iostream>
#include <string>
#include <vector>

#include "qwres/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qwres::cli::main(args, std::cout, std::cerr);
}
