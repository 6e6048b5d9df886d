#include <iostream>

#include "eqte/cli.hpp"

int main(int argc, char** argv) { return eqte::cli::run(argc, argv, std::cerr); }
