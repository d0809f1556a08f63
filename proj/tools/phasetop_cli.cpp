#include <iostream>

#include "phasetop/cli.hpp"

int main(int argc, char** argv) { return phasetop::cliMain(argc, argv, std::cout, std::cerr); }
