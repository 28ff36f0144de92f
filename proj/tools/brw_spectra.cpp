#include <iostream>
#include <string>
#include <vector>

#include "brw/cli.hpp"

int main(int argc, char** argv) {
  return brw::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
