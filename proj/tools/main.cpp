#include <iostream>

#include "repchain/cli.hpp"

int main(int argc, char** argv) { return repchain::run_cli(argc, argv, std::cout, std::cerr); }
