#include <iostream>

#include "cli/cli.hpp"

int main(int argc, char** argv) {
  return stylespace::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
