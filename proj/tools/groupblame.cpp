#include <iostream>

#include "groupblame/cli/app.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return groupblame::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
