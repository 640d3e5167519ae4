#include <iostream>
#include <string>
#include <vector>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
  return crowdcount::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
