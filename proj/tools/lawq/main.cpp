#include <iostream>
#include <string>
#include <vector>

#include "lawq/cli/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return lawq::cli::run(args, std::cout, std::cerr);
}
