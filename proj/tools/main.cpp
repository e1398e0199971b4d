#include <iostream>

#include "plflab/cli.hpp"

int main(int argc, char** argv) { return plf::cli::run_cli(argc, argv, std::cout, std::cerr); }
