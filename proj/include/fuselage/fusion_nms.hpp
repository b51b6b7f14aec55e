#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "fuselage/geometry.hpp"

namespace fuselage {

// Per-frame detection pool of one modality (or a fused result). Scores and
// variances are views of the boxes, so the three lists can never disagree.
class DetectionSet {
 public:
  DetectionSet() = default;
  explicit DetectionSet(std::vector<GaussianBox> boxes) : boxes_(std::move(boxes)) {}
  DetectionSet(std::initializer_list<GaussianBox> boxes) : boxes_(boxes) {}

  const std::vector<GaussianBox>& boxes() const { return boxes_; }
  std::vector<double> scores() const;
  std::vector<Vec4> variances() const;

  void push_back(const GaussianBox& b) { boxes_.push_back(b); }
  std::size_t size() const { return boxes_.size(); }
  bool empty() const { return boxes_.empty(); }
  const GaussianBox& operator[](std::size_t i) const { return boxes_[i]; }
  auto begin() const { return boxes_.begin(); }
  auto end() const { return boxes_.end(); }

  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;

 private:
  std::vector<GaussianBox> boxes_;
};

enum class DecayKind { kLinear, kGaussian };

struct FusionConfig {
  double t1 = 0.45;  // low IoU gate
  double t2 = 0.7;   // high IoU gate
  DecayKind decay = DecayKind::kGaussian;
  double sigma_s = 0.5;
  double single_modal_nms_iou = 0.45;
  double score_floor = 0.01;
  bool per_class = true;

  // Gate pair used in the experiments.
  static FusionConfig experiment() { return {}; }
  // The lower reference gate pair (0.3, 0.5).
  static FusionConfig reference() {
    FusionConfig c;
    c.t1 = 0.3;
    c.t2 = 0.5;
    return c;
  }
};

// Throws ConfigError unless 0 <= t1 < t2 <= 1, sigma_s > 0 and
// score_floor in [0, 1).
void validate(const FusionConfig& cfg);

enum class OverlapCase { kCase1, kCase2, kCase3 };

// Greedy max-score NMS. A box is discarded when its IoU with an already kept
// box exceeds `iou_thresh`. Output is sorted by descending score with ties
// broken by input order. With `per_class`, only same-class boxes suppress
// each other.
DetectionSet standard_nms(const DetectionSet& dets, double iou_thresh, bool per_class = false);

// Confidence decay f(IoU) applied to the score of a box overlapping the
// selected one. Never increases the score.
double decay(double score, double overlap, const FusionConfig& cfg);

OverlapCase classify_overlap(double iou_value, const FusionConfig& cfg);

// Inverse-variance weighted update of `anchor` over the boxes of `pool`
// whose IoU with the anchor exceeds `gate`. Boxes identical to the anchor
// always qualify, so a pool containing the anchor is never empty after
// gating. Fused variance is 1 / sum(1 / var). Score, class and modality are
// the anchor's. Throws InsufficientDataError when nothing qualifies.
GaussianBox softer_update(const GaussianBox& anchor, std::span<const GaussianBox> pool,
                          double gate);

// Single-pool soft-NMS with variance voting: every selected box absorbs the
// remaining boxes whose IoU with it is at least cfg.t1.
DetectionSet softer_nms(const DetectionSet& dets, const FusionConfig& cfg);

// Uncertainty-aware multi-source NMS over an RGB pool and a depth pool.
DetectionSet multi_source_nms(const DetectionSet& rgb, const DetectionSet& depth,
                              const FusionConfig& cfg);

// Deliberately literal re-implementation of multi_source_nms used as a test
// oracle: no precomputation, recomputes every IoU, linear scans everywhere.
DetectionSet oracle_multi_source_nms(const DetectionSet& rgb, const DetectionSet& depth,
                                     const FusionConfig& cfg);

}  // namespace fuselage
