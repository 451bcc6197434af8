#include <iostream>

#include "wsnqd/commands.hpp"

int main(int argc, char** argv) { return wsnqd::run_cli(argc, argv, std::cout, std::cerr); }
