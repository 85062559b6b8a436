#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "due/core/rng.hpp"

using namespace due;

TEST_CASE("same seed gives identical streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams are independent of sibling consumption") {
  Rng root(3);
  Rng s1 = root.substream("data");
  Rng s2 = root.substream("init");
  // Drawing from one substream must not change the other's sequence.
  Rng s1_again = Rng(3).substream("data");
  for (int i = 0; i < 10; ++i) (void)s2.next_u64();
  for (int i = 0; i < 20; ++i) CHECK(s1.next_u64() == s1_again.next_u64());
}

TEST_CASE("distinct substream names decorrelate") {
  Rng root(3);
  CHECK(root.substream("a").next_u64() != root.substream("b").next_u64());
}

TEST_CASE("uniform range and normal moments") {
  Rng rng(11);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("uniform_index stays in range and shuffle is a permutation") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_index(7) < 7);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[i] == i);
}
