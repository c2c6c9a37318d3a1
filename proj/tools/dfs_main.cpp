#include "dfs/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dfs::run_cli(argc, argv, std::cout, std::cerr); }
