#include "sumreward/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sumreward::cli::run(argc, argv, std::cout, std::cerr); }
