#include <iostream>

#include "keymix/cli.hpp"

int main(int argc, char** argv) { return keymix::cli::run(argc, argv, std::cout, std::cerr); }
