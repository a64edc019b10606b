#include <iostream>
#include <string>
#include <vector>

#include "borealis/cli.hpp"

int main(int argc, char** argv) {
  return borealis::cli::main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
