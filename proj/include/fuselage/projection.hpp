#pragma once

#include <array>
#include <vector>

#include "fuselage/raster.hpp"

namespace fuselage {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

struct PointCloud {
  std::vector<LidarPoint> points;
};

// Sensor-to-image calibration: pixel ~ K (R p + T).
struct CalibMatrices {
  Mat3 K{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Mat3 R{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 T{0, 0, 0};
};

// Throws CalibrationError unless R is orthonormal within 1e-6 and K is upper
// triangular with positive focal terms.
void validate(const CalibMatrices& calib);

struct ProjectionOptions {
  int out_width = 512;
  int out_height = 128;
  // Size of the full projected image; the output is its bottom-centred crop.
  // Zero means "same as the output" (no crop).
  int image_width = 1242;
  int image_height = 375;
  double max_range = 80.0;  // metres mapped to 1.0
};

void validate(const ProjectionOptions& opts);

// Column/row offset of the crop inside the full image.
std::array<int, 2> crop_origin(const ProjectionOptions& opts);

Vec3 sensor_to_camera(const CalibMatrices& calib, const LidarPoint& p);

// Z-buffered single-pixel splat of every point in front of the camera.
// Pixel (u, v) of the full image lands in column floor(u + 0.5) - crop_x.
DepthImage project_points(const PointCloud& cloud, const CalibMatrices& calib,
                          const ProjectionOptions& opts = {});

// Camera-frame point seen at output pixel (col, row) with normalized depth
// `value` (inverse of project_points at pixel centres).
Vec3 back_project(const CalibMatrices& calib, const ProjectionOptions& opts, int col, int row,
                  double value);

// Same, at continuous output coordinates (pixel centres are integers).
Vec3 back_project(const CalibMatrices& calib, const ProjectionOptions& opts, double col,
                  double row, double value);

}  // namespace fuselage
