#include "fuselage/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fuselage/error.hpp"

namespace fuselage {

void validate(const CalibMatrices& calib) {
  constexpr double kTol = 1e-6;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 3; ++k) dot += calib.R[i][k] * calib.R[j][k];
      const double expect = i == j ? 1.0 : 0.0;
      if (!(std::abs(dot - expect) <= kTol)) {
        throw CalibrationError("rotation is not orthonormal (row " + std::to_string(i) + "·row " +
                               std::to_string(j) + " = " + std::to_string(dot) + ")");
      }
    }
  }
  const auto& K = calib.K;
  if (K[1][0] != 0.0 || K[2][0] != 0.0 || K[2][1] != 0.0) {
    throw CalibrationError("intrinsics must be upper triangular");
  }
  if (!(K[0][0] > 0.0) || !(K[1][1] > 0.0) || !(K[2][2] > 0.0)) {
    throw CalibrationError("intrinsics need positive focal terms");
  }
  for (double t : calib.T) {
    if (!std::isfinite(t)) throw CalibrationError("translation must be finite");
  }
}

void validate(const ProjectionOptions& opts) {
  if (opts.out_width <= 0 || opts.out_height <= 0) {
    throw ConfigError("output size must be positive");
  }
  if (opts.image_width < 0 || opts.image_height < 0) {
    throw ConfigError("image size must be non-negative");
  }
  if (!(opts.max_range > 0.0)) throw ConfigError("max range must be positive");
}

std::array<int, 2> crop_origin(const ProjectionOptions& opts) {
  const int iw = opts.image_width > 0 ? opts.image_width : opts.out_width;
  const int ih = opts.image_height > 0 ? opts.image_height : opts.out_height;
  return {(iw - opts.out_width) / 2, ih - opts.out_height};
}

Vec3 sensor_to_camera(const CalibMatrices& calib, const LidarPoint& p) {
  const std::array<double, 3> v = {p.x, p.y, p.z};
  Vec3 c{};
  for (std::size_t i = 0; i < 3; ++i) {
    c[i] = calib.R[i][0] * v[0] + calib.R[i][1] * v[1] + calib.R[i][2] * v[2] + calib.T[i];
  }
  return c;
}

DepthImage project_points(const PointCloud& cloud, const CalibMatrices& calib,
                          const ProjectionOptions& opts) {
  validate(calib);
  validate(opts);
  const auto [ox, oy] = crop_origin(opts);
  const auto& K = calib.K;

  std::vector<double> zbuf(static_cast<std::size_t>(opts.out_width) * opts.out_height,
                           std::numeric_limits<double>::infinity());
  for (const auto& p : cloud.points) {
    const Vec3 c = sensor_to_camera(calib, p);
    if (!(c[2] > 0.0)) continue;
    const double hx = K[0][0] * c[0] + K[0][1] * c[1] + K[0][2] * c[2];
    const double hy = K[1][1] * c[1] + K[1][2] * c[2];
    const double hz = K[2][2] * c[2];
    const double u = hx / hz;
    const double v = hy / hz;
    if (!std::isfinite(u) || !std::isfinite(v)) continue;
    const double col = std::floor(u + 0.5) - ox;
    const double row = std::floor(v + 0.5) - oy;
    if (col < 0 || row < 0 || col >= opts.out_width || row >= opts.out_height) continue;
    const std::size_t idx = static_cast<std::size_t>(row) * opts.out_width +
                            static_cast<std::size_t>(col);
    zbuf[idx] = std::min(zbuf[idx], c[2]);
  }

  DepthImage img(opts.out_width, opts.out_height, 1, 0.0f);
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (std::isfinite(zbuf[i])) {
      img.data[i] = static_cast<float>(std::clamp(zbuf[i] / opts.max_range, 0.0, 1.0));
    }
  }
  return img;
}

Vec3 back_project(const CalibMatrices& calib, const ProjectionOptions& opts, int col, int row,
                  double value) {
  return back_project(calib, opts, static_cast<double>(col), static_cast<double>(row), value);
}

Vec3 back_project(const CalibMatrices& calib, const ProjectionOptions& opts, double col,
                  double row, double value) {
  const auto [ox, oy] = crop_origin(opts);
  const double u = col + ox;
  const double v = row + oy;
  const double cz = value * opts.max_range;
  const auto& K = calib.K;
  // Solve K c = hz (u, v, 1) by back substitution, hz = K22 cz.
  const double hz = K[2][2] * cz;
  const double cy = (v * hz - K[1][2] * cz) / K[1][1];
  const double cx = (u * hz - K[0][1] * cy - K[0][2] * cz) / K[0][0];
  return {cx, cy, cz};
}

}  // namespace fuselage
