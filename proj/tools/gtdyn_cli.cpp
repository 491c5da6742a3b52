#include <iostream>

#include "gtdyn/commands.hpp"

int main(int argc, char** argv) {
  return gtdyn::run_cli(argc, argv, std::cout, std::cerr);
}
