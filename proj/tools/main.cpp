#include <iostream>

#include "uigen/cli/app.hpp"

int main(int argc, char** argv) { return uigen::cli::run(argc, argv, std::cout, std::cerr); }
