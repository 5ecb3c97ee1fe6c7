#include <cstdio>
#include <exception>

#include "cross_check.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: replay_check GOLDEN_LOG\n");
    return 2;
  }
  try {
    std::fputs(valori::testing::cross_check_report(argv[1]).c_str(), stdout);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
