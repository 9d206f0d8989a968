#include <iostream>
#include <string>
#include <vector>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  return hdp::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
