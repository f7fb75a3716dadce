#include <iostream>

#include "puzzleforge/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return puzzleforge::run(args, std::cout, std::cerr);
}
