#include <iostream>

#include "gffperc/cli.hpp"

int main(int argc, char** argv) { return gffperc::run_cli(argc, argv, std::cout, std::cerr); }
