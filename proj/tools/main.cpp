#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return spod::cli::run_cli(argc, argv, std::cout, std::cerr); }
