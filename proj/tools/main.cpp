#include <iostream>

#include "cotcurate/pipeline.hpp"

int main(int argc, char** argv) { return cotcurate::run_cli(argc, argv, std::cout, std::cerr); }
