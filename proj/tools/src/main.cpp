#include <iostream>
#include <string>
#include <vector>

#include "refcond/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return refcond::cli::run(args, std::cout, std::cerr);
}
