#include <doctest.h>

#include <cmath>
#include <set>

#include "swiss/random.hpp"

using namespace swiss;

TEST_CASE("mix64 matches one splitmix64 step") {
  // First two outputs of splitmix64 started from state 0.
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("identical (master, stream) pairs give identical sequences") {
  RngStream a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.engine()() == b.engine()());
  RngStream c(42, 3), d(42, 3);
  CHECK(c.normal_vector(50) == d.normal_vector(50));
}

TEST_CASE("different streams diverge") {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  const auto x = a.engine()(), y = b.engine()(), z = c.engine()();
  CHECK(x != y);
  CHECK(x != z);
}

TEST_CASE("derive_seed separates repetitions and streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 20; ++r)
    for (std::uint64_t s = 0; s < 20; ++s) seen.insert(derive_seed(7, r, s));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(7, 1, 2) == derive_seed(7, 1, 2));
}

TEST_CASE("uniform and normal have the right first two moments") {
  RngStream rng(1, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("chi-squared mean equals its degrees of freedom") {
  RngStream rng(5, 0);
  const int n = 100000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += rng.chi_squared(7.0);
  // sd of a chi2(7) draw is sqrt(14)
  CHECK(std::abs(s / n - 7.0) < 4.0 * std::sqrt(14.0 / n));
}
