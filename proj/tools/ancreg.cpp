#include <iostream>
#include <string>
#include <vector>

#include "ancreg/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return ancreg::run_cli(args, std::cout, std::cerr);
}
