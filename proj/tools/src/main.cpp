#include <iostream>

#include "upsilon/cli.hpp"

int main(int argc, char** argv) {
  return upsilon::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
