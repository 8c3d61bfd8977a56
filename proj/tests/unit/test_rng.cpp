#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "mpqa/rng.hpp"

TEST_SUITE("rng") {

TEST_CASE("uniform01 stays in [0,1) and is seed-deterministic") {
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = mpqa::uniform01(a);
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(x == mpqa::uniform01(b));
  }
}

TEST_CASE("uniform_index respects bounds and hits every bucket") {
  std::mt19937_64 g(7);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const uint64_t k = mpqa::uniform_index(g, 5);
    REQUIRE(k < 5);
    ++counts[k];
  }
  for (int c : counts) CHECK(c > 800);  // ~1000 expected per bucket
}

TEST_CASE("normal01 has roughly standard moments") {
  std::mt19937_64 g(3);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = mpqa::normal01(g);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle produces a permutation and depends only on the seed") {
  std::vector<int> v(20);
  for (int i = 0; i < 20; ++i) v[i] = i;
  std::mt19937_64 g(11);
  mpqa::shuffle_in_place(v, g);

  std::vector<int> w = v;
  std::sort(w.begin(), w.end());
  for (int i = 0; i < 20; ++i) CHECK(w[i] == i);

  std::vector<int> v2(20);
  for (int i = 0; i < 20; ++i) v2[i] = i;
  std::mt19937_64 g2(11);
  mpqa::shuffle_in_place(v2, g2);
  CHECK(v == v2);
}

}  // TEST_SUITE
