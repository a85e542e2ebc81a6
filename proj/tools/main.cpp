#include <iostream>
#include <string>
#include <vector>

#include "chainhash/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return chainhash::run_cli(args, std::cout, std::cerr);
}
