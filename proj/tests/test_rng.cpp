#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "pocc/rng.hpp"

using namespace pocc;

TEST_CASE("same seed reproduces the stream, different seeds differ") {
  Rng a(42), b(42), c(43);
  bool any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    any_diff |= (va != c.next_u64());
  }
  CHECK(any_diff);
}

TEST_CASE("uniform draws live in [0,1) with the right moments") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("normal draws have the right moments") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));  // 3 SE
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  // location/scale form
  Rng rng2(11);
  Rng rng3(11);
  for (int i = 0; i < 100; ++i)
    CHECK(rng2.next_normal(3.0, 2.0) == 3.0 + 2.0 * rng3.next_normal());
}

TEST_CASE("bernoulli frequencies track p") {
  Rng rng(13);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += rng.next_bernoulli(0.165) ? 1 : 0;
  const double se = std::sqrt(0.165 * 0.835 / n);
  CHECK(std::abs(hits / static_cast<double>(n) - 0.165) < 4.0 * se);
}

TEST_CASE("next_below is bounded and roughly uniform") {
  Rng rng(17);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t v = rng.next_below(10);
    REQUIRE(v < 10);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c - n / 10) < 5 * std::sqrt(n * 0.1 * 0.9));
  // bound 1 always yields 0
  for (int i = 0; i < 10; ++i) CHECK(rng.next_below(1) == 0);
}

TEST_CASE("derive_seed separates streams by tag") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t scenario = 0; scenario < 3; ++scenario)
    for (std::uint64_t n = 0; n < 8; ++n)
      for (std::uint64_t rep = 0; rep < 50; ++rep)
        seeds.insert(derive_seed(123, {scenario, n, rep}));
  CHECK(seeds.size() == 3 * 8 * 50);
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
}
