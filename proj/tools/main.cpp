#include <iostream>
#include <string>
#include <vector>

#include "qcflow/cli.hpp"

int main(int argc, char** argv) {
  return qcflow::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
