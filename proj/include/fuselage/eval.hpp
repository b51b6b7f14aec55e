#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuselage/fusion_nms.hpp"
#include "fuselage/geometry.hpp"

namespace fuselage {

struct GroundTruthObject {
  int class_id = kCar;
  CornerBox box;

  friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

struct GroundTruthFrame {
  std::string frame_id;
  std::vector<GroundTruthObject> objects;

  friend bool operator==(const GroundTruthFrame&, const GroundTruthFrame&) = default;
};

// Throws RangeError for degenerate boxes or class ids outside {0, 1, 2}.
void validate(const GroundTruthFrame& frame);

struct Match {
  GaussianBox det;
  std::optional<std::size_t> gt;  // index into GroundTruthFrame::objects
  double iou = 0.0;
};

// Greedy matching in descending score order (ties keep input order): each
// detection claims the unclaimed same-class ground truth of highest IoU,
// provided that IoU reaches `iou_gate`. Returned in processing order.
std::vector<Match> match_detections(std::span<const GaussianBox> dets,
                                    const GroundTruthFrame& gt, double iou_gate = 0.5);

struct FrameEvaluation {
  std::vector<Match> matches;
  std::array<std::size_t, kNumClasses> num_gt{};
};

FrameEvaluation evaluate_frame(std::span<const GaussianBox> dets, const GroundTruthFrame& gt,
                               double iou_gate = 0.5);

// 11-point interpolated AP of one class over a corpus. nullopt when the
// class has no ground truth (it is then excluded from mAP).
std::optional<double> average_precision(std::span<const FrameEvaluation> frames, int class_id);

struct ClassResult {
  std::optional<double> ap;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t num_gt = 0;
};

struct EvalReport {
  std::array<ClassResult, kNumClasses> classes{};
  double mAP = 0.0;  // unweighted mean over classes that have ground truth
};

EvalReport summarize(std::span<const FrameEvaluation> frames);

// Frame i of `dets` is scored against frame i of `gts`.
EvalReport evaluate_corpus(std::span<const DetectionSet> dets,
                           std::span<const GroundTruthFrame> gts, double iou_gate = 0.5);

}  // namespace fuselage
