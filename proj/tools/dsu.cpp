#include <iostream>

#include "dsu/harness/cli.hpp"

int main(int argc, char** argv) { return dsu::cli::run(argc, argv, std::cout, std::cerr); }
