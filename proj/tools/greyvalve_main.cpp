#include <iostream>
#include <string>
#include <vector>

#include "greyvalve/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return greyvalve::cli::run(args, std::cout, std::cerr);
}
