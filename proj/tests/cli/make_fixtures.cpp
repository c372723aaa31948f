// Writes the synthetic dataset used by the CLI tests into argv[1].
#include <cstdio>

#include "support/fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures <dir>\n");
    return 1;
  }
  testsupport::make_dataset(argv[1], 10);
  return 0;
}
