#include <iostream>
#include <string>
#include <vector>

#include "molblocks/cli.h"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  const std::vector<std::string> args(argv, argv + argc);
  return molblocks::cli::run(args, std::cin, std::cout, std::cerr);
}
