#include "tvdp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tvdp::cli::run(argc, argv, std::cout, std::cerr); }
