#include <string>
#include <vector>

#include "vitag/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vitag::run(args);
}
