#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return rslq::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
