#include <iostream>

#include "ensq/cli.hpp"

int main(int argc, char** argv) {
    return ensq::cli::run(argc, argv, std::cout, std::cerr);
}
