#include "zskg/cli.hpp"

int main(int argc, char** argv) {
  return zskg::run(std::vector<std::string>(argv + 1, argv + argc));
}
