#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "fuselage/raster.hpp"

namespace fuselage {

enum class CorruptionKind { kGaussianNoise, kMotionBlur, kFrost };

inline constexpr std::array<CorruptionKind, 3> kAllCorruptions = {
    CorruptionKind::kGaussianNoise, CorruptionKind::kMotionBlur, CorruptionKind::kFrost};
inline constexpr int kMaxSeverity = 5;

std::string_view corruption_name(CorruptionKind k);
CorruptionKind parse_corruption(std::string_view name);  // ConfigError when unknown

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kGaussianNoise;
  int level = 0;  // 0 is the identity, 1..5 the severity ladder
  std::uint64_t seed = 0;
  double blur_angle_deg = 0.0;
};

void validate(const CorruptionSpec& spec);

// Parameters of one severity level. Only the fields relevant to the kind
// are meaningful.
struct SeverityParams {
  double noise_sigma = 0.0;   // gaussian noise, on the [0,1] scale
  int blur_length = 1;        // motion blur kernel length, pixels
  double frost_opacity = 0.0; // frost alpha
  double frost_coverage = 0.0;
};

// Levels 1..5, strictly monotone in the primary parameter of each kind.
std::array<SeverityParams, 5> severity_ladder(CorruptionKind kind);

// Applies the corruption; output values are clamped to [0, 1]. Level 0
// returns the input unchanged. Throws FormatError for channel counts other
// than 1 or 3.
Raster corrupt(const Raster& img, const CorruptionSpec& spec);

}  // namespace fuselage
