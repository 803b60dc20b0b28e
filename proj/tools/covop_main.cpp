#include <string>
#include <vector>

#include "covop/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return covop::cli_run(args);
}
