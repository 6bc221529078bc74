#include <iostream>

#include "unifam/cli.hpp"

int main(int argc, char** argv) { return unifam::cli::run(argc, argv, std::cout, std::cerr); }
