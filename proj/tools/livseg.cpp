#include <iostream>

#include "livseg/cli.hpp"

int main(int argc, char** argv) { return livseg::cli::run_cli(argc, argv, std::cout, std::cerr); }
