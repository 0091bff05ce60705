#include <iostream>

#include "survkit/cli.hpp"

int main(int argc, char** argv) { return survkit::run_cli(argc, argv, std::cout, std::cerr); }
