#include <iostream>

#include "cardnet/cli.hpp"

int main(int argc, char** argv) { return cardnet::cli::run(argc, argv, std::cout, std::cerr); }
