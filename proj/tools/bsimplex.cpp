#include <iostream>

#include "bsimplex/cli.hpp"

int main(int argc, char** argv)
{
    return bsimplex::cli::run(argc, argv, std::cout, std::cerr);
}
