#include <iostream>

#include "seamcam/cli.hpp"

int main(int argc, char **argv) { return seamcam::cli::run(argc, argv, std::cout, std::cerr); }
