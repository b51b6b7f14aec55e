#include "fuselage/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fuselage/error.hpp"

namespace fuselage {

std::string_view modality_name(Modality m) {
  return m == Modality::kRgb ? "rgb" : "depth";
}

Modality parse_modality(std::string_view name) {
  if (name == "rgb") return Modality::kRgb;
  if (name == "depth") return Modality::kDepth;
  throw ConfigError("unknown modality '" + std::string(name) + "'");
}

std::string_view class_name(int class_id) {
  switch (class_id) {
    case kCar:
      return "car";
    case kPedestrian:
      return "pedestrian";
    case kCyclist:
      return "cyclist";
    default:
      return "unknown";
  }
}

bool is_valid(const GaussianBox& b) noexcept {
  for (double m : b.mu) {
    if (!std::isfinite(m)) return false;
  }
  if (!(b.mu[kW] > 0.0) || !(b.mu[kH] > 0.0)) return false;
  for (double v : b.var) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  return b.score >= 0.0 && b.score <= 1.0;
}

bool is_valid(const CornerBox& b) noexcept {
  return std::isfinite(b.x_min) && std::isfinite(b.y_min) && std::isfinite(b.x_max) &&
         std::isfinite(b.y_max) && b.x_min < b.x_max && b.y_min < b.y_max;
}

void validate(const GaussianBox& b) {
  if (!is_valid(b)) {
    throw RangeError("invalid GaussianBox: need finite means, positive size, positive finite "
                     "variances and score in [0,1]");
  }
}

void validate(const CornerBox& b) {
  if (!is_valid(b)) {
    throw RangeError("invalid CornerBox: need x_min < x_max and y_min < y_max");
  }
}

CornerBox to_corners(const GaussianBox& b) {
  const double hw = 0.5 * b.mu[kW];
  const double hh = 0.5 * b.mu[kH];
  return {b.mu[kX] - hw, b.mu[kY] - hh, b.mu[kX] + hw, b.mu[kY] + hh};
}

GaussianBox from_corners(const CornerBox& c) {
  GaussianBox b;
  b.mu = {0.5 * (c.x_min + c.x_max), 0.5 * (c.y_min + c.y_max), c.x_max - c.x_min,
          c.y_max - c.y_min};
  return b;
}

GaussianBox from_corners(const CornerBox& c, const GaussianBox& like) {
  GaussianBox b = like;
  b.mu = from_corners(c).mu;
  return b;
}

double iou(const CornerBox& a, const CornerBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double iou(const GaussianBox& a, const GaussianBox& b) {
  return iou(to_corners(a), to_corners(b));
}

double sigmoid_scale(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

double mean_variance(const GaussianBox& b) {
  return 0.25 * (b.var[kX] + b.var[kY] + b.var[kW] + b.var[kH]);
}

}  // namespace fuselage
