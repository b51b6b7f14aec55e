#include "fuselage/eval.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fuselage/error.hpp"

namespace fuselage {

void validate(const GroundTruthFrame& frame) {
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    const auto& o = frame.objects[i];
    if (o.class_id < 0 || o.class_id >= kNumClasses) {
      throw RangeError("frame " + frame.frame_id + ": object " + std::to_string(i) +
                       " has class id " + std::to_string(o.class_id));
    }
    if (!is_valid(o.box)) {
      throw RangeError("frame " + frame.frame_id + ": object " + std::to_string(i) +
                       " has a degenerate box");
    }
  }
}

std::vector<Match> match_detections(std::span<const GaussianBox> dets,
                                    const GroundTruthFrame& gt, double iou_gate) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<char> claimed(gt.objects.size(), 0);
  std::vector<Match> out;
  out.reserve(dets.size());
  for (std::size_t i : order) {
    const CornerBox dc = to_corners(dets[i]);
    Match m{dets[i], std::nullopt, 0.0};
    double best = -1.0;
    for (std::size_t g = 0; g < gt.objects.size(); ++g) {
      if (claimed[g] || gt.objects[g].class_id != dets[i].class_id) continue;
      const double o = iou(dc, gt.objects[g].box);
      if (o > best) {
        best = o;
        if (o >= iou_gate) m.gt = g;
      }
    }
    if (m.gt) {
      claimed[*m.gt] = 1;
      m.iou = best;
    } else {
      m.iou = std::max(best, 0.0);
    }
    out.push_back(m);
  }
  return out;
}

FrameEvaluation evaluate_frame(std::span<const GaussianBox> dets, const GroundTruthFrame& gt,
                               double iou_gate) {
  FrameEvaluation fe;
  fe.matches = match_detections(dets, gt, iou_gate);
  for (const auto& o : gt.objects) {
    if (o.class_id >= 0 && o.class_id < kNumClasses) ++fe.num_gt[static_cast<std::size_t>(o.class_id)];
  }
  return fe;
}

std::optional<double> average_precision(std::span<const FrameEvaluation> frames, int class_id) {
  std::size_t num_gt = 0;
  std::vector<std::pair<double, bool>> ranked;
  for (const auto& f : frames) {
    num_gt += f.num_gt[static_cast<std::size_t>(class_id)];
    for (const auto& m : f.matches) {
      if (m.det.class_id == class_id) ranked.emplace_back(m.det.score, m.gt.has_value());
    }
  }
  if (num_gt == 0) return std::nullopt;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  // Interpolated precision at recall r is the best precision at any recall
  // >= r; sweep from the tail keeping a running maximum.
  std::vector<double> recall(ranked.size()), precision(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    tp += ranked[i].second ? 1 : 0;
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = ranked.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  std::size_t k = 0;
  for (int step = 0; step <= 10; ++step) {
    const double t = step / 10.0;
    while (k < recall.size() && recall[k] < t) ++k;
    ap += k < recall.size() ? precision[k] : 0.0;
  }
  return ap / 11.0;
}

EvalReport summarize(std::span<const FrameEvaluation> frames) {
  EvalReport report;
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& cr = report.classes[static_cast<std::size_t>(c)];
    for (const auto& f : frames) {
      cr.num_gt += f.num_gt[static_cast<std::size_t>(c)];
      for (const auto& m : f.matches) {
        if (m.det.class_id != c) continue;
        (m.gt ? cr.tp : cr.fp) += 1;
      }
    }
    cr.fn = cr.num_gt - cr.tp;
    cr.ap = average_precision(frames, c);
    if (cr.ap) {
      sum += *cr.ap;
      ++counted;
    }
  }
  report.mAP = counted > 0 ? sum / counted : 0.0;
  return report;
}

EvalReport evaluate_corpus(std::span<const DetectionSet> dets,
                           std::span<const GroundTruthFrame> gts, double iou_gate) {
  if (dets.size() != gts.size()) {
    throw ConfigError("evaluate_corpus: " + std::to_string(dets.size()) + " detection frames vs " +
                      std::to_string(gts.size()) + " ground-truth frames");
  }
  std::vector<FrameEvaluation> frames;
  frames.reserve(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    frames.push_back(evaluate_frame(dets[i].boxes(), gts[i], iou_gate));
  }
  return summarize(frames);
}

}  // namespace fuselage
