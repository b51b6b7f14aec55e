#include "fuselage/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "fuselage/error.hpp"
#include "fuselage/philox.hpp"

namespace fuselage {

namespace {

constexpr std::uint32_t kMissLane = 0x6d697373u;    // "miss"
constexpr std::uint32_t kJitterLane = 0x6a697474u;  // "jitt"
constexpr std::uint32_t kScoreLane = 0x73636f72u;   // "scor"
constexpr std::uint32_t kFpLane = 0x66616c73u;      // "fals"
constexpr std::uint32_t kCorpusLane = 0x636f7270u;  // "corp"
constexpr int kMaxFalsePositives = 8;
constexpr double kVarianceFloor = 1e-6;

NoiseResponse make_response(std::array<double, 5> sigma, std::array<double, 5> miss,
                       std::array<double, 5> fp) {
  return {sigma, miss, fp};
}

struct ClassShape {
  double h_min, h_span;        // box height range, pixels
  double aspect_min, aspect_span;  // width / height
};

constexpr std::array<ClassShape, kNumClasses> kShapes = {{
    {25.0, 100.0, 1.4, 0.8},  // car
    {35.0, 110.0, 0.35, 0.15},  // pedestrian
    {30.0, 90.0, 0.6, 0.3},   // cyclist
}};

int class_from_uniform(double u) {
  if (u < 0.60) return kCar;
  if (u < 0.85) return kPedestrian;
  return kCyclist;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

CornerBox random_box(int cls, double u_size, double u_aspect, double u_x, double u_y, int width,
                     int height) {
  const auto& s = kShapes[static_cast<std::size_t>(cls)];
  const double h = s.h_min + s.h_span * std::pow(u_size, 1.5);
  const double w = std::min(h * (s.aspect_min + s.aspect_span * u_aspect), width - 2.0);
  const double cx = 0.5 * w + u_x * (width - w);
  const double y_bottom = 0.45 * height + u_y * 0.55 * height;
  const double y_top = std::max(0.0, y_bottom - h);
  return {round2(cx - 0.5 * w), round2(y_top), round2(cx + 0.5 * w), round2(y_bottom)};
}

}  // namespace

SimDetectorSpec SimDetectorSpec::rgb_default() {
  SimDetectorSpec s;
  s.modality = Modality::kRgb;
  s.sigma_base = 4.0;
  s.miss_rate = 0.10;
  s.fp_rate = 0.4;
  s.fidelity = 0.9;
  s.seed = 0x5eed0001;
  s.response[static_cast<std::size_t>(CorruptionKind::kGaussianNoise)] =
      make_response({1.4, 2.0, 2.8, 3.8, 5.0}, {1.5, 2.2, 3, 4.5, 6}, {1.5, 2.5, 3.5, 4.5, 5.5});
  s.response[static_cast<std::size_t>(CorruptionKind::kMotionBlur)] =
      make_response({1.2, 1.6, 2.2, 3.0, 4.0}, {1.3, 1.8, 2.5, 3.5, 5}, {1.2, 1.6, 2.2, 2.8, 3.4});
  s.response[static_cast<std::size_t>(CorruptionKind::kFrost)] =
      make_response({1.7, 2.3, 2.7, 3.0, 3.4}, {2, 3, 4, 4.6, 5.2}, {2, 3, 3.5, 4, 4.5});
  return s;
}

SimDetectorSpec SimDetectorSpec::depth_default() {
  SimDetectorSpec s;
  s.modality = Modality::kDepth;
  s.sigma_base = 3.0;
  s.miss_rate = 0.04;
  s.fp_rate = 0.3;
  s.fidelity = 0.9;
  s.seed = 0x5eed0002;
  s.response[static_cast<std::size_t>(CorruptionKind::kGaussianNoise)] =
      make_response({1.6, 2.5, 3.6, 5.0, 7.0}, {1.5, 2.5, 4, 6, 8}, {1.5, 2.5, 3.5, 4.5, 5.5});
  s.response[static_cast<std::size_t>(CorruptionKind::kMotionBlur)] =
      make_response({1.2, 1.5, 1.9, 2.4, 3.0}, {1.2, 1.6, 2.4, 3.4, 4.6}, {1.1, 1.3, 1.6, 1.9, 2.2});
  s.response[static_cast<std::size_t>(CorruptionKind::kFrost)] =
      make_response({2.0, 2.8, 3.4, 3.8, 4.2}, {2.5, 5, 7, 8, 9}, {2, 3, 3.5, 4, 4.5});
  return s;
}

void validate(const SimDetectorSpec& spec) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!(spec.sigma_base >= 0.0)) throw ConfigError("sigma_base must be >= 0");
  if (!prob(spec.miss_rate)) throw ConfigError("miss_rate must lie in [0, 1]");
  if (!prob(spec.fidelity)) throw ConfigError("fidelity must lie in [0, 1]");
  if (!(spec.fp_rate >= 0.0)) throw ConfigError("fp_rate must be >= 0");
  if (!(spec.var_constant > 0.0)) throw ConfigError("var_constant must be > 0");
  if (!prob(spec.fp_score_max)) throw ConfigError("fp_score_max must lie in [0, 1]");
  if (!(spec.score_gamma > 0.0) || !(spec.score_jitter >= 0.0)) {
    throw ConfigError("score model parameters must be positive");
  }
  if (spec.candidates < 1) throw ConfigError("candidates must be >= 1");
  if (spec.image_width < 4 || spec.image_height < 4) throw ConfigError("image too small");
  for (const auto& r : spec.response) {
    for (std::size_t i = 0; i < 5; ++i) {
      if (!(r.sigma_mult[i] >= 0.0) || !(r.miss_mult[i] >= 0.0) || !(r.fp_mult[i] >= 0.0)) {
        throw ConfigError("noise response multipliers must be >= 0");
      }
    }
  }
}

EffectiveNoise effective_noise(const SimDetectorSpec& spec, const CorruptionSpec& corruption) {
  double sm = 1.0, mm = 1.0, fm = 1.0;
  if (corruption.level > 0) {
    const auto& r = spec.response[static_cast<std::size_t>(corruption.kind)];
    const auto i = static_cast<std::size_t>(corruption.level - 1);
    sm = r.sigma_mult[i];
    mm = r.miss_mult[i];
    fm = r.fp_mult[i];
  }
  EffectiveNoise e;
  e.sigma = spec.sigma_base * sm;
  e.miss_rate = std::min(1.0, spec.miss_rate * mm);
  e.fp_rate = spec.fp_rate * fm;
  e.reported_var = std::max(
      spec.fidelity * e.sigma * e.sigma + (1.0 - spec.fidelity) * spec.var_constant,
      kVarianceFloor);
  return e;
}

DetectionSet simulate_detections(const GroundTruthFrame& gt, const SimDetectorSpec& spec,
                                 const CorruptionSpec& corruption) {
  validate(spec);
  validate(corruption);
  const EffectiveNoise noise = effective_noise(spec, corruption);
  const std::uint32_t lane = fnv1a32(gt.frame_id);
  const Vec4 reported{noise.reported_var, noise.reported_var, noise.reported_var,
                      noise.reported_var};

  DetectionSet out;
  for (std::size_t j = 0; j < gt.objects.size(); ++j) {
    const auto obj = static_cast<std::uint32_t>(j);
    if (RandomBlock::at(spec.seed, {lane, obj, 0, kMissLane}).uniform[0] < noise.miss_rate) {
      continue;
    }
    const CornerBox truth = gt.objects[j].box;
    const GaussianBox centre = from_corners(truth);
    for (int k = 0; k < spec.candidates; ++k) {
      const auto cand = static_cast<std::uint32_t>(k);
      const auto z = RandomBlock::at(spec.seed, {lane, obj, cand, kJitterLane}).normals();
      GaussianBox b;
      for (std::size_t c = 0; c < 4; ++c) b.mu[c] = centre.mu[c] + noise.sigma * z[c];
      b.mu[kW] = std::max(b.mu[kW], 1.0);
      b.mu[kH] = std::max(b.mu[kH], 1.0);
      b.var = reported;
      b.class_id = gt.objects[j].class_id;
      b.modality = spec.modality;
      // Corner round trips can cost an ulp of IoU; a noiseless box is exact.
      const double q = noise.sigma > 0.0 ? iou(to_corners(b), truth) : 1.0;
      const double zs = RandomBlock::at(spec.seed, {lane, obj, cand, kScoreLane}).normals()[0];
      b.score = std::clamp(
          std::pow(q, spec.score_gamma) * std::exp(-spec.score_jitter * std::abs(zs) * (1.0 - q)),
          0.0, 1.0);
      out.push_back(b);
    }
  }

  // Background false positives. Slot k exists when its uniform falls below
  // rate / slots, so raising the rate only ever adds boxes.
  const double per_slot = std::min(1.0, noise.fp_rate / kMaxFalsePositives);
  for (int k = 0; k < kMaxFalsePositives; ++k) {
    const auto slot = static_cast<std::uint32_t>(k);
    const auto a = RandomBlock::at(spec.seed, {lane, slot, 0, kFpLane}).uniform;
    if (a[0] >= per_slot) continue;
    const auto p = RandomBlock::at(spec.seed, {lane, slot, 1, kFpLane}).uniform;
    const int cls = class_from_uniform(a[1]);
    GaussianBox b = from_corners(
        random_box(cls, a[2], a[3], p[0], p[1], spec.image_width, spec.image_height));
    b.var = reported;
    b.class_id = cls;
    b.modality = spec.modality;
    b.score = spec.fp_score_max * std::pow(p[2], 1.5);
    out.push_back(b);
  }
  return out;
}

std::vector<GroundTruthFrame> generate_corpus(std::size_t frames, std::uint64_t seed,
                                              int image_width, int image_height) {
  if (image_width < 64 || image_height < 64) throw ConfigError("corpus image too small");
  std::vector<GroundTruthFrame> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto fi = static_cast<std::uint32_t>(f);
    GroundTruthFrame frame;
    std::array<char, 24> name{};
    std::snprintf(name.data(), name.size(), "%06zu", f);
    frame.frame_id = name.data();
    const auto head = RandomBlock::at(seed, {fi, 0, 0, kCorpusLane}).uniform;
    const int count = 1 + std::min(7, static_cast<int>(head[0] * 8.0));
    for (int j = 0; j < count; ++j) {
      const auto oj = static_cast<std::uint32_t>(j + 1);
      const auto u = RandomBlock::at(seed, {fi, oj, 0, kCorpusLane}).uniform;
      const auto v = RandomBlock::at(seed, {fi, oj, 1, kCorpusLane}).uniform;
      const int cls = class_from_uniform(u[0]);
      const CornerBox box = random_box(cls, u[1], v[0], u[2], u[3], image_width, image_height);
      if (!is_valid(box)) continue;
      frame.objects.push_back({cls, box});
    }
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace fuselage
