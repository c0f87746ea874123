#include <iostream>
#include <string>
#include <vector>

#include "seamforge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return seamforge::dispatch(args, std::cout, std::cerr);
}
