#include <iostream>

#include "qfreq/cli.hpp"

int main(int argc, char** argv) { return qfreq::run_cli(argc, argv, std::cout, std::cerr); }
