#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <set>
#include <vector>

#include "specband/random.hpp"

using namespace specband;

TEST_CASE("philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams") {
  const CounterRng a(42, 0), b(42, 1), c(43, 0);
  SUBCASE("replay is order independent") {
    std::vector<double> fwd;
    for (int i = 0; i < 100; ++i) fwd.push_back(a.uniform(i));
    for (int i = 99; i >= 0; --i) CHECK(CounterRng(42, 0).uniform(i) == fwd[i]);
  }
  SUBCASE("streams and seeds differ") {
    std::set<double> seen;
    for (int i = 0; i < 1000; ++i) {
      seen.insert(a.uniform(i));
      seen.insert(b.uniform(i));
      seen.insert(c.uniform(i));
    }
    CHECK(seen.size() == 3000);
  }
  SUBCASE("uniform range and moments") {
    double s = 0, s2 = 0, lo = 1, hi = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = a.uniform(i);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      s += u;
      s2 += u * u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(s / n - 0.5) < 0.005);
    CHECK(std::abs(s2 / n - 1.0 / 3) < 0.005);
  }
  SUBCASE("high counter bits reach the block") {
    CHECK(a.block(1) != a.block(1ULL << 32 | 1));
    CHECK(CounterRng(42, 1ULL << 32).block(0) != a.block(0));
  }
}
