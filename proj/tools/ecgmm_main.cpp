#include <iostream>

#include "ecgmm/cli.hpp"

int main(int argc, char** argv) { return ecgmm::run_cli(argc, argv, std::cerr); }
