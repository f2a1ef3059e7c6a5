#include <iostream>

#include "app/cli.hpp"

int main(int argc, char** argv) {
  return fbrrt::app::cli_main(argc, argv, std::cout, std::cerr);
}
