// dsff_main.cpp

#include <iostream>
#include <string>
#include <vector>

#include "dsff/cli.h"

int main(int argc, char** argv) {
  return dsff::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
