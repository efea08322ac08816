#include <iostream>

#include "ness/cli.hpp"

int main(int argc, char** argv) { return ness::cli::run(argc, argv, std::cout, std::cerr); }
