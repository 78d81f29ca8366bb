#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "mpvi/rng.hpp"

using mpvi::Rng;

TEST_CASE("identical seeds give identical streams", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams differ from each other", "[rng]") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 64; ++s)
    firsts.insert(mpvi::derive_rng(7, s).next_u64());
  REQUIRE(firsts.size() == 64);
}

TEST_CASE("uniform01 stays in [0, 1)", "[rng]") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform_int covers the closed range", "[rng]") {
  Rng rng(11);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(-10, 10);
    REQUIRE(v >= -10);
    REQUIRE(v <= 10);
    seen.insert(v);
  }
  REQUIRE(seen.size() == 21);
}

TEST_CASE("normal draws have sane moments", "[rng]") {
  Rng rng(5);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}
