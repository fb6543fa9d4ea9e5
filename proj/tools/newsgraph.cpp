#include <iostream>
#include <string>
#include <vector>

#include "newsgraph/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return newsgraph::app::run(args, std::cout, std::cerr);
}
