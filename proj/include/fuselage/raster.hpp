#pragma once

#include <cstddef>
#include <vector>

namespace fuselage {

// Interleaved row-major image with values nominally in [0, 1]. One channel
// for depth, three for RGB.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Raster() = default;
  Raster(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  float& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  float at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  friend bool operator==(const Raster&, const Raster&) = default;
};

using DepthImage = Raster;

// Affine map of [min, max] to [0, 1]; a constant raster maps to zeros.
Raster normalize_raster(const Raster& img);

}  // namespace fuselage
