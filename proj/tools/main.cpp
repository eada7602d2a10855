#include <iostream>

#include "cade/cli.hpp"

int main(int argc, char** argv) { return cade::run_cli(argc, argv, std::cout, std::cerr); }
