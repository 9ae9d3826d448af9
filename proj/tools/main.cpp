#include <iostream>

#include "tfsp/cli.hpp"

int main(int argc, char** argv) { return tfsp::cli::run(argc, argv, std::cout, std::cerr); }
