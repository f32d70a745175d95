#include <iostream>

#include "annuli/cli.hpp"

int main(int argc, char** argv) { return annuli::cli::run(argc, argv, std::cout, std::cerr); }
