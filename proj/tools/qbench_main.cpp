#include <iostream>

#include "qbench/cli.hpp"

int main(int argc, char** argv) {
  return qbench::cli::run(argc, argv, std::cout, std::cerr);
}
