#include <iostream>

#include "kpp/cli.hpp"

int main(int argc, char** argv) { return kpp::cli::main(argc, argv, std::cout, std::cerr); }
