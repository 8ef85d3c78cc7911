#include <iostream>

#include "wfboot_cli/commands.hpp"

int main(int argc, char** argv) { return wfboot::cli::run_cli(argc, argv, std::cout, std::cerr); }
