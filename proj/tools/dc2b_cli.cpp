#include <iostream>
#include <string>
#include <vector>

#include "dc2b/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dc2b::cli::main_entry(args, std::cout, std::cerr);
}
