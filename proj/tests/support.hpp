#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "fuselage/fusion_nms.hpp"
#include "fuselage/geometry.hpp"

namespace fuselage::test {

inline std::filesystem::path data_dir() { return FUSELAGE_TEST_DATA; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline GaussianBox random_box(std::mt19937_64& rng, Modality m = Modality::kRgb, int classes = 1,
                              double extent = 60.0) {
  GaussianBox b;
  b.mu = {uniform(rng, 0, extent), uniform(rng, 0, extent), uniform(rng, 4, 30),
          uniform(rng, 4, 30)};
  for (auto& v : b.var) v = uniform(rng, 0.1, 10.0);
  b.score = uniform(rng, 0.02, 1.0);
  b.class_id = static_cast<int>(std::uniform_int_distribution<int>(0, classes - 1)(rng));
  b.modality = m;
  return b;
}

inline DetectionSet random_set(std::mt19937_64& rng, Modality m, std::size_t max_n,
                               int classes = 1, double extent = 60.0) {
  const auto n = std::uniform_int_distribution<std::size_t>(0, max_n)(rng);
  DetectionSet s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(random_box(rng, m, classes, extent));
  return s;
}

inline GaussianBox make_box(double x, double y, double w, double h, double var, double score,
                            Modality m = Modality::kRgb, int cls = 0) {
  GaussianBox b;
  b.mu = {x, y, w, h};
  b.var = {var, var, var, var};
  b.score = score;
  b.class_id = cls;
  b.modality = m;
  return b;
}

}  // namespace fuselage::test
