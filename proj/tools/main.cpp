#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nexos::cli::run(argc, argv, std::cout, std::cerr); }
