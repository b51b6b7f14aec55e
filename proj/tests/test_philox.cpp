#include <doctest.h>

#include <cmath>

#include "fuselage/philox.hpp"

using namespace fuselage;

TEST_SUITE("philox") {
  TEST_CASE("known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
          C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                               {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                               {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("seed splits into the two key words") {
    CHECK(Philox4x32::key_from_seed(0x0123456789abcdefull) ==
          Philox4x32::Key{0x89abcdefu, 0x01234567u});
  }

  TEST_CASE("unit mapping stays inside the open interval") {
    CHECK(to_unit(0) > 0.0);
    CHECK(to_unit(0xffffffffu) < 1.0);
    CHECK(to_unit(0x80000000u) == doctest::Approx(0.5));
  }

  TEST_CASE("normals have unit moments") {
    double s = 0, s2 = 0;
    const int n = 200000;
    for (std::uint32_t i = 0; i < n / 4; ++i) {
      for (double z : RandomBlock::at(99, {i, 1, 2, 3}).normals()) {
        s += z;
        s2 += z * z;
      }
    }
    const double mean = s / n;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(s2 / n - mean * mean - 1.0) < 0.015);
  }

  TEST_CASE("fnv1a32 reference values") {
    CHECK(fnv1a32("") == 0x811c9dc5u);
    CHECK(fnv1a32("a") == 0xe40c292cu);
    CHECK(fnv1a32("foobar") == 0xbf9cf968u);
  }

  TEST_CASE("mix_seed is the SplitMix64 step") {
    // First output of SplitMix64 seeded with 0.
    CHECK(mix_seed(0, 0) == 0xe220a8397b1dcdafull);
    CHECK(mix_seed(1, 7) != mix_seed(1, 8));
  }
}
