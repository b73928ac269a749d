#include <iostream>

#include "satcap/cli.hpp"

int main(int argc, char** argv) { return satcap::cli::run(argc, argv, std::cout, std::cerr); }
