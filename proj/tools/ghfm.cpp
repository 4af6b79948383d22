#include "ghfm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ghfm::run_cli(argc, argv, std::cout, std::cerr); }
