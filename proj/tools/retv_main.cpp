#include <iostream>

#include "retv/cli.hpp"

int main(int argc, char** argv) {
  return retv::cli_main(argc, argv, std::cout, std::cerr);
}
