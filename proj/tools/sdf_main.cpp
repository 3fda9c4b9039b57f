#include <iostream>

#include "sdf/cli.hpp"

int main(int argc, char** argv) {
    return sdf::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
