#include <iostream>

#include "edgempc/cli.h"

int main(int argc, char** argv) {
  return edgempc::RunCli(argc, argv, std::cout, std::cerr);
}
