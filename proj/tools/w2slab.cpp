#include "w2slab/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return w2slab::run_cli(argc, argv, std::cout, std::cerr); }
