#include <iostream>

#include "seep/cli.hpp"

int main(int argc, char** argv) { return seep::run_cli(argc, argv, std::cout, std::cerr); }
