#include <iostream>

#include "npca/cli.hpp"

int main(int argc, char** argv) { return npca::run_cli(argc, argv, std::cout, std::cerr); }
