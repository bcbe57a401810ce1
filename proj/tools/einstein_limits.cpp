#include <iostream>

#include "einstein_limits/cli.hpp"

int main(int argc, char** argv) { return elim::run_command_line(argc, argv, std::cout, std::cerr); }
