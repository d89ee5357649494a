#include <iostream>

#include "lis/commands.hpp"

int main(int argc, char** argv) { return lis::run_cli(argc, argv, std::cout, std::cerr); }
