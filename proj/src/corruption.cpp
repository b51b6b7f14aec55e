#include "fuselage/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fuselage/error.hpp"
#include "fuselage/philox.hpp"

namespace fuselage {

std::string_view corruption_name(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::kGaussianNoise:
      return "gaussian_noise";
    case CorruptionKind::kMotionBlur:
      return "motion_blur";
    case CorruptionKind::kFrost:
      return "frost";
  }
  return "unknown";
}

CorruptionKind parse_corruption(std::string_view name) {
  for (auto k : kAllCorruptions) {
    if (name == corruption_name(k)) return k;
  }
  if (name == "gaussian") return CorruptionKind::kGaussianNoise;
  if (name == "motion") return CorruptionKind::kMotionBlur;
  throw ConfigError("unknown corruption kind '" + std::string(name) +
                    "' (expected gaussian_noise, motion_blur or frost)");
}

void validate(const CorruptionSpec& spec) {
  if (spec.level < 0 || spec.level > kMaxSeverity) {
    throw ConfigError("corruption level must be in [0, 5], got " + std::to_string(spec.level));
  }
  if (!std::isfinite(spec.blur_angle_deg)) throw ConfigError("blur angle must be finite");
}

std::array<SeverityParams, 5> severity_ladder(CorruptionKind kind) {
  std::array<SeverityParams, 5> ladder{};
  constexpr std::array<double, 5> kSigma = {0.08, 0.12, 0.18, 0.26, 0.38};
  constexpr std::array<int, 5> kLength = {7, 11, 15, 19, 23};
  constexpr std::array<double, 5> kOpacity = {0.25, 0.35, 0.45, 0.55, 0.65};
  constexpr std::array<double, 5> kCoverage = {0.30, 0.38, 0.46, 0.54, 0.62};
  for (std::size_t i = 0; i < 5; ++i) {
    switch (kind) {
      case CorruptionKind::kGaussianNoise:
        ladder[i].noise_sigma = kSigma[i];
        break;
      case CorruptionKind::kMotionBlur:
        ladder[i].blur_length = kLength[i];
        break;
      case CorruptionKind::kFrost:
        ladder[i].frost_opacity = kOpacity[i];
        ladder[i].frost_coverage = kCoverage[i];
        break;
    }
  }
  return ladder;
}

namespace {

// Counter lane tags keep the streams of different corruptions disjoint.
constexpr std::uint32_t kNoiseLane = 0x6e6f6973u;  // "nois"
constexpr std::uint32_t kFrostLane = 0x66726f73u;  // "fros"

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

Raster gaussian_noise(const Raster& img, double sigma, std::uint64_t seed) {
  Raster out = img;
  const std::size_t n = img.data.size();
  for (std::size_t block = 0; block * 4 < n; ++block) {
    const auto z = RandomBlock::at(seed, {static_cast<std::uint32_t>(block),
                                          static_cast<std::uint32_t>(block >> 32), kNoiseLane, 0})
                       .normals();
    for (std::size_t k = 0; k < 4 && block * 4 + k < n; ++k) {
      const std::size_t i = block * 4 + k;
      out.data[i] = clamp01(static_cast<double>(img.data[i]) + sigma * z[k]);
    }
  }
  return out;
}

// Reflect-101 border handling (the edge pixel is not repeated).
int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

Raster motion_blur(const Raster& img, int length, double angle_deg) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const int half = length / 2;
  std::vector<std::pair<int, int>> taps;
  taps.reserve(static_cast<std::size_t>(length));
  for (int t = -half; t <= half; ++t) {
    taps.emplace_back(static_cast<int>(std::lround(t * std::cos(theta))),
                      static_cast<int>(std::lround(-t * std::sin(theta))));
  }
  Raster out = img;
  const double inv = static_cast<double>(taps.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        double sum = 0.0;
        for (const auto& [dx, dy] : taps) {
          sum += img.at(reflect(x + dx, img.width), reflect(y + dy, img.height), c);
        }
        out.at(x, y, c) = clamp01(sum / inv);
      }
    }
  }
  return out;
}

double lattice_value(std::uint64_t seed, int ix, int iy, std::uint32_t octave) {
  const auto w = Philox4x32::generate(
      {static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy), octave, kFrostLane},
      Philox4x32::key_from_seed(seed));
  return to_unit(w[0]);
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear value noise on an anisotropic lattice of cell size (sx, sy).
double value_noise(std::uint64_t seed, double x, double y, double sx, double sy,
                   std::uint32_t octave) {
  const double gx = x / sx;
  const double gy = y / sy;
  const int ix = static_cast<int>(std::floor(gx));
  const int iy = static_cast<int>(std::floor(gy));
  const double fx = smooth(gx - ix);
  const double fy = smooth(gy - iy);
  const double v00 = lattice_value(seed, ix, iy, octave);
  const double v10 = lattice_value(seed, ix + 1, iy, octave);
  const double v01 = lattice_value(seed, ix, iy + 1, octave);
  const double v11 = lattice_value(seed, ix + 1, iy + 1, octave);
  const double top = v00 + (v10 - v00) * fx;
  const double bottom = v01 + (v11 - v01) * fx;
  return top + (bottom - top) * fy;
}

// Ridged multi-octave noise in [0, 1]. Alternating stretch directions give
// the thin crossing streaks that read as ice crystals.
double frost_field(std::uint64_t seed, int x, int y) {
  double sum = 0.0;
  double norm = 0.0;
  double amp = 1.0;
  double scale = 48.0;
  for (std::uint32_t o = 0; o < 4; ++o) {
    const bool horizontal = (o % 2) == 0;
    const double n = value_noise(seed, x, y, horizontal ? scale : scale * 0.35,
                                 horizontal ? scale * 0.35 : scale, o);
    sum += amp * (1.0 - std::abs(2.0 * n - 1.0));
    norm += amp;
    amp *= 0.55;
    scale *= 0.5;
  }
  return sum / norm;
}

Raster frost(const Raster& img, double opacity, double coverage, std::uint64_t seed) {
  constexpr double kSoftness = 0.08;
  constexpr std::array<double, 3> kTint = {0.86, 0.91, 0.97};
  constexpr double kGray = 0.92;
  // Ridged noise concentrates near its upper range; a threshold of
  // 1 - coverage leaves roughly `coverage` of the frame iced.
  const double threshold = 1.0 - coverage;
  Raster out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double f = frost_field(seed, x, y);
      const double t = std::clamp((f - threshold + kSoftness) / (2.0 * kSoftness), 0.0, 1.0);
      const double alpha = opacity * smooth(t);
      for (int c = 0; c < img.channels; ++c) {
        const double tint = img.channels == 3 ? kTint[static_cast<std::size_t>(c)] : kGray;
        const double v = img.at(x, y, c);
        out.at(x, y, c) = clamp01(v + alpha * (tint - v));
      }
    }
  }
  return out;
}

}  // namespace

Raster corrupt(const Raster& img, const CorruptionSpec& spec) {
  validate(spec);
  if (img.channels != 1 && img.channels != 3) {
    throw FormatError("corrupt: unsupported channel count " + std::to_string(img.channels));
  }
  if (img.data.size() != img.pixel_count() * static_cast<std::size_t>(img.channels)) {
    throw FormatError("corrupt: raster buffer does not match its dimensions");
  }
  if (spec.level == 0) return img;
  const SeverityParams p = severity_ladder(spec.kind)[static_cast<std::size_t>(spec.level - 1)];
  switch (spec.kind) {
    case CorruptionKind::kGaussianNoise:
      return gaussian_noise(img, p.noise_sigma, spec.seed);
    case CorruptionKind::kMotionBlur:
      return motion_blur(img, p.blur_length, spec.blur_angle_deg);
    case CorruptionKind::kFrost:
      return frost(img, p.frost_opacity, p.frost_coverage, spec.seed);
  }
  return img;
}

}  // namespace fuselage
