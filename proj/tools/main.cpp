// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return prolite::cli::main(argc, argv, std::cin, std::cout, std::cerr); }
