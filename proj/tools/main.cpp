#include <string>
#include <vector>

#include "strokelab/cli.hpp"

int main(int argc, char** argv) {
  return strokelab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
