#include <iostream>
#include <string>
#include <vector>

#include "conemetric/run.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return conemetric::run(args, std::cout, std::cerr);
}
