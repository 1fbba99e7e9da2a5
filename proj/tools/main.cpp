#include <vector>

#include "tcs/harness.hpp"

int main(int argc, char** argv) {
  return tcs::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
