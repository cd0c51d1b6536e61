#include <iostream>

#include "procforge/cli.hpp"

int main(int argc, char** argv) {
  return procforge::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
