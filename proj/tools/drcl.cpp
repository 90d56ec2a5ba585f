#include "drcl/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return drcl::cli::run_command(argc, argv, std::cout, std::cerr); }
