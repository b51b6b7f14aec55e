#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace fuselage {

using Vec4 = std::array<double, 4>;

// Index of each regressed box parameter inside a Vec4.
enum Coord : std::size_t { kX = 0, kY = 1, kW = 2, kH = 3 };

enum class Modality : std::uint8_t { kRgb = 0, kDepth = 1 };

enum ObjectClass : int { kCar = 0, kPedestrian = 1, kCyclist = 2 };
inline constexpr int kNumClasses = 3;

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view name);  // ConfigError on unknown names
std::string_view class_name(int class_id);

// A detection whose four box parameters are independent Gaussians.
// `mu` holds the center (x, y) and size (w, h) in pixels, `var` the
// per-parameter variance in pixels squared.
struct GaussianBox {
  Vec4 mu{0.0, 0.0, 1.0, 1.0};
  Vec4 var{1.0, 1.0, 1.0, 1.0};
  double score = 0.0;
  int class_id = kCar;
  Modality modality = Modality::kRgb;

  double mu_x() const { return mu[kX]; }
  double mu_y() const { return mu[kY]; }
  double mu_w() const { return mu[kW]; }
  double mu_h() const { return mu[kH]; }

  friend bool operator==(const GaussianBox&, const GaussianBox&) = default;
};

struct CornerBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const CornerBox&, const CornerBox&) = default;
};

// Throws RangeError when a box violates its invariants.
void validate(const GaussianBox& b);
void validate(const CornerBox& b);
bool is_valid(const GaussianBox& b) noexcept;
bool is_valid(const CornerBox& b) noexcept;

CornerBox to_corners(const GaussianBox& b);

// Center-form mean of a corner box; variances, score and class are left at
// their defaults (or copied from `like` in the second overload).
GaussianBox from_corners(const CornerBox& c);
GaussianBox from_corners(const CornerBox& c, const GaussianBox& like);

double iou(const CornerBox& a, const CornerBox& b);
double iou(const GaussianBox& a, const GaussianBox& b);

double sigmoid_scale(double raw);

double mean_variance(const GaussianBox& b);

}  // namespace fuselage
