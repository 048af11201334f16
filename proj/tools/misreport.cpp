#include <iostream>

#include "misreport/cli.hpp"

int main(int argc, char** argv) { return misreport::run_cli(argc, argv, std::cout, std::cerr); }
