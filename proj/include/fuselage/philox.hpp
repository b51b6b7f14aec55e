#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace fuselage {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). Every draw is a pure function of
// (key, counter), so per-pixel and per-object streams can be generated in
// any order or in parallel with identical results.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  static constexpr int kRounds = 10;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }
};

// Maps a 32-bit word to the open interval (0, 1).
inline double to_unit(std::uint32_t w) { return (static_cast<double>(w) + 0.5) * 0x1p-32; }

// Four uniforms and four standard normals (Box-Muller on word pairs) for a
// given counter.
struct RandomBlock {
  std::array<double, 4> uniform{};

  static RandomBlock at(std::uint64_t seed, Philox4x32::Counter ctr) {
    const auto words = Philox4x32::generate(ctr, Philox4x32::key_from_seed(seed));
    RandomBlock b;
    for (std::size_t i = 0; i < 4; ++i) b.uniform[i] = to_unit(words[i]);
    return b;
  }

  std::array<double, 4> normals() const {
    std::array<double, 4> z{};
    for (std::size_t i = 0; i < 4; i += 2) {
      const double r = std::sqrt(-2.0 * std::log(uniform[i]));
      const double theta = 2.0 * std::numbers::pi * uniform[i + 1];
      z[i] = r * std::cos(theta);
      z[i + 1] = r * std::sin(theta);
    }
    return z;
  }
};

// FNV-1a, used to turn frame ids and file names into counter lanes.
constexpr std::uint32_t fnv1a32(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  return h;
}

// SplitMix64 finalizer; derives independent seeds from (seed, salt).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace fuselage
