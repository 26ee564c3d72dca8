#include "qsm/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return qsm::run_cli(argc, argv, std::cout, std::cerr);
}
