#include <iostream>

#include "feed4org/cli.hpp"

int main(int argc, char** argv) {
  return feed4org::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
