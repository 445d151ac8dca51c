#include <cmath>
#include <set>

#include "doctest.h"
#include "siglab/rng.hpp"

using namespace siglab;

TEST_CASE("same seed, same stream") {
  RngStream a(42), b(42);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42), d(43);
  bool all_equal = true;
  for (int i = 0; i < 8; ++i) all_equal = all_equal && c.next_u64() == d.next_u64();
  CHECK_FALSE(all_equal);
}

TEST_CASE("stream ids decorrelate without touching the seed") {
  RngStream a(7, 0), b(7, 1);
  bool all_equal = true;
  for (int i = 0; i < 8; ++i) all_equal = all_equal && a.next_u64() == b.next_u64();
  CHECK_FALSE(all_equal);
  std::set<std::uint64_t> derived;
  for (std::uint64_t salt = 0; salt < 100; ++salt) derived.insert(derive_seed(99, salt));
  CHECK(derived.size() == 100);
  CHECK(derive_seed(99, 5) == derive_seed(99, 5));
}

TEST_CASE("next_double and uniform stay inside their intervals") {
  RngStream rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.5, 3.5);
    CHECK(v >= -2.5);
    CHECK(v < 3.5);
  }
}

TEST_CASE("next_index covers [0, n) roughly uniformly") {
  RngStream rng(13);
  const std::uint64_t n = 7;
  std::uint64_t counts[7] = {0};
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const std::uint64_t k = rng.next_index(n);
    REQUIRE(k < n);
    ++counts[k];
  }
  for (std::uint64_t c : counts) {
    CHECK(static_cast<double>(c) == doctest::Approx(draws / 7.0).epsilon(0.05));
  }
  CHECK(rng.next_index(1) == 0);
}

TEST_CASE("normal draws have standard moments") {
  RngStream rng(17);
  double sum = 0.0, sq = 0.0, cube = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_normal();
    sum += x;
    sq += x * x;
    cube += x * x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(cube / n) < 0.1);
}
