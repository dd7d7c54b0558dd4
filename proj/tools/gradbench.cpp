#include "gradbench/bench.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return gradbench::cli_main(argc, argv, std::cout, std::cerr);
}
