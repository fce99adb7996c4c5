#include <iostream>

#include "quadvp/cli.hpp"

int main(int argc, char** argv) { return quadvp::run_cli(argc, argv, std::cout, std::cerr); }
