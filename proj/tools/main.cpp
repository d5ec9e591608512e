#include <iostream>

#include "touchpoint/cli.hpp"

int main(int argc, char** argv) { return touchpoint::cli::run(argc, argv, std::cout, std::cerr); }
