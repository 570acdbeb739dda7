#include <iostream>
#include <string>
#include <vector>

#include "sbf/cli.hpp"

int main(int argc, char** argv) {
  return sbf::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
