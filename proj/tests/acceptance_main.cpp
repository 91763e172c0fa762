#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>

int main(int argc, char** argv) {
  doctest::Context context(argc, argv);
  std::printf("acceptance suite\n");
  const int rc = context.run();
  return rc;
}
