#include <iostream>

#include "gesa/cli/cli.h"

int main(int argc, char** argv) {
  return gesa::cli::RunCli(argc, argv, std::cout, std::cerr);
}
