#include <iostream>
#include <string>
#include <vector>

#include "bcbound/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bcbound::run_cli(std::move(args), std::cout, std::cerr);
}
