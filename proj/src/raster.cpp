#include "fuselage/raster.hpp"

#include <algorithm>

namespace fuselage {

Raster normalize_raster(const Raster& img) {
  Raster out = img;
  if (img.data.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(img.data.begin(), img.data.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(out.data.begin(), out.data.end(), 0.0f);
    return out;
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<float>(std::clamp((img.data[i] - lo) / span, 0.0, 1.0));
  }
  return out;
}

}  // namespace fuselage
