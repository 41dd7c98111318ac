#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return e2nn::cli::run_main(argc, argv, std::cout, std::cerr); }
