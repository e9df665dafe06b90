#include <iostream>

#include "pushac/cli.hpp"

int main(int argc, char** argv) {
    return pushac::cli::run_command(argc, argv, std::cout, std::cerr);
}
