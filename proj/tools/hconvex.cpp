#include "hconvex/app/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return hconvex::app::run_cli(argc, argv, std::cout, std::cerr); }
