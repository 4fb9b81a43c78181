#include <iostream>

#include "cli_core.hpp"

int main(int argc, char** argv) { return hbmgreen::cli::main_entry(argc, argv, std::cout, std::cerr); }
