#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fuselage/corruption.hpp"
#include "fuselage/eval.hpp"
#include "fuselage/fusion_nms.hpp"

namespace fuselage {

// How a detector reacts to one corruption kind, per severity level 1..5.
// Level 0 always uses multiplier 1.
struct NoiseResponse {
  std::array<double, 5> sigma_mult{1, 1, 1, 1, 1};
  std::array<double, 5> miss_mult{1, 1, 1, 1, 1};
  std::array<double, 5> fp_mult{1, 1, 1, 1, 1};
};

// Synthetic stand-in for a trained single-modality detector. Each ground
// truth object yields `candidates` raw (pre-NMS) boxes unless missed.
struct SimDetectorSpec {
  Modality modality = Modality::kRgb;
  double sigma_base = 3.0;     // localization noise, pixels
  double miss_rate = 0.05;     // probability an object yields no candidates
  double fp_rate = 0.3;        // expected background false positives per frame
  double fidelity = 1.0;       // 1: reported variance is the true noise variance
  double var_constant = 16.0;  // reported variance at fidelity 0, pixels^2
  double score_gamma = 2.0;    // score ~ IoU(candidate, truth)^gamma ...
  double score_jitter = 1.5;   // ... times exp(-jitter |z| (1 - IoU))
  double fp_score_max = 0.5;
  int candidates = 3;
  int image_width = 1242;
  int image_height = 375;
  std::array<NoiseResponse, 3> response{};  // indexed by CorruptionKind
  std::uint64_t seed = 1;

  // Defaults used by the degradation experiments: depth is the more
  // accurate modality and reacts less to motion blur.
  static SimDetectorSpec rgb_default();
  static SimDetectorSpec depth_default();
};

void validate(const SimDetectorSpec& spec);

struct EffectiveNoise {
  double sigma = 0.0;
  double miss_rate = 0.0;
  double fp_rate = 0.0;
  double reported_var = 0.0;
};

EffectiveNoise effective_noise(const SimDetectorSpec& spec, const CorruptionSpec& corruption);

// Deterministic in (frame_id, spec.seed). The corruption contributes only its
// kind and level: the same underlying draws are reused across severities, so
// harder levels perturb the very same boxes further.
DetectionSet simulate_detections(const GroundTruthFrame& gt, const SimDetectorSpec& spec,
                                 const CorruptionSpec& corruption);

// Random corpus of `frames` frames with 1-8 objects each and a 60/25/15
// car/pedestrian/cyclist mix. Corners are rounded to 0.01 px like KITTI
// labels.
std::vector<GroundTruthFrame> generate_corpus(std::size_t frames, std::uint64_t seed,
                                              int image_width = 1242, int image_height = 375);

}  // namespace fuselage
