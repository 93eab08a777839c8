#include <iostream>

#include "rankshrink/cli.hpp"

int main(int argc, char** argv) { return rankshrink::cli::run(argc, argv, std::cout, std::cerr); }
