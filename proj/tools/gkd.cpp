#include <iostream>

#include "gkd/cli.hpp"

int main(int argc, char** argv) { return gkd::cli::run_cli(argc, argv, std::cout, std::cerr); }
