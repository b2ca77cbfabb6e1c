#include <iostream>

#include "hvlab/cli.hpp"

int main(int argc, char** argv)
{
    return hvlab::cli::run(argc, argv, std::cout, std::cerr);
}
