#include "fuselage/fusion_nms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fuselage/error.hpp"

namespace fuselage {

std::vector<double> DetectionSet::scores() const {
  std::vector<double> out;
  out.reserve(boxes_.size());
  for (const auto& b : boxes_) out.push_back(b.score);
  return out;
}

std::vector<Vec4> DetectionSet::variances() const {
  std::vector<Vec4> out;
  out.reserve(boxes_.size());
  for (const auto& b : boxes_) out.push_back(b.var);
  return out;
}

void validate(const FusionConfig& cfg) {
  if (!(cfg.t1 >= 0.0 && cfg.t1 < cfg.t2 && cfg.t2 <= 1.0)) {
    throw ConfigError("fusion gates must satisfy 0 <= t1 < t2 <= 1 (got t1=" +
                      std::to_string(cfg.t1) + ", t2=" + std::to_string(cfg.t2) + ")");
  }
  if (!(cfg.sigma_s > 0.0) || !std::isfinite(cfg.sigma_s)) {
    throw ConfigError("decay sigma must be positive");
  }
  if (!(cfg.score_floor >= 0.0 && cfg.score_floor < 1.0)) {
    throw ConfigError("score floor must lie in [0, 1)");
  }
  if (!(cfg.single_modal_nms_iou >= 0.0 && cfg.single_modal_nms_iou <= 1.0)) {
    throw ConfigError("single-modal NMS IoU must lie in [0, 1]");
  }
}

double decay(double score, double overlap, const FusionConfig& cfg) {
  switch (cfg.decay) {
    case DecayKind::kLinear:
      return overlap > cfg.t1 ? score * (1.0 - overlap) : score;
    case DecayKind::kGaussian:
      return score * std::exp(-(overlap * overlap) / cfg.sigma_s);
  }
  return score;
}

OverlapCase classify_overlap(double iou_value, const FusionConfig& cfg) {
  if (iou_value >= cfg.t2) return OverlapCase::kCase1;
  if (iou_value >= cfg.t1) return OverlapCase::kCase2;
  return OverlapCase::kCase3;
}

namespace {

bool keeps(double score, const FusionConfig& cfg) {
  return score > 0.0 && score >= cfg.score_floor;
}

// Running inverse-variance accumulator. Members must be added in pool order
// for results to be reproducible bit for bit.
class PrecisionSum {
 public:
  void add(const GaussianBox& b) {
    for (std::size_t c = 0; c < 4; ++c) {
      num_[c] += b.mu[c] / b.var[c];
      den_[c] += 1.0 / b.var[c];
      lo_[c] = std::min(lo_[c], b.mu[c]);
      hi_[c] = std::max(hi_[c], b.mu[c]);
    }
    if (count_ == 0) first_var_ = b.var;
    ++count_;
  }

  std::size_t count() const { return count_; }

  // The weighted mean is clamped to the members' range so a set of equal
  // values reproduces that value exactly; a singleton keeps its variance.
  GaussianBox result(const GaussianBox& anchor, double score) const {
    GaussianBox out = anchor;
    out.score = score;
    for (std::size_t c = 0; c < 4; ++c) {
      out.mu[c] = std::clamp(num_[c] / den_[c], lo_[c], hi_[c]);
      out.var[c] = count_ == 1 ? first_var_[c] : 1.0 / den_[c];
    }
    return out;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  Vec4 num_{};
  Vec4 den_{};
  Vec4 lo_{kInf, kInf, kInf, kInf};
  Vec4 hi_{-kInf, -kInf, -kInf, -kInf};
  Vec4 first_var_{};
  std::size_t count_ = 0;
};

// Splits `boxes` into per-class groups (ascending class id), preserving
// relative order. Without per_class a single group holds everything.
std::vector<std::vector<GaussianBox>> group_by_class(std::span<const GaussianBox> boxes,
                                                     bool per_class) {
  std::vector<std::vector<GaussianBox>> groups;
  if (!per_class) {
    groups.emplace_back(boxes.begin(), boxes.end());
    return groups;
  }
  std::vector<int> ids;
  for (const auto& b : boxes) ids.push_back(b.class_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  groups.resize(ids.size());
  for (const auto& b : boxes) {
    auto pos = std::lower_bound(ids.begin(), ids.end(), b.class_id) - ids.begin();
    groups[static_cast<std::size_t>(pos)].push_back(b);
  }
  return groups;
}

struct Emitted {
  GaussianBox box;
  std::size_t order;
};

DetectionSet canonical_order(std::vector<Emitted> emitted) {
  std::stable_sort(emitted.begin(), emitted.end(), [](const Emitted& a, const Emitted& b) {
    if (a.box.score != b.box.score) return a.box.score > b.box.score;
    if (a.box.class_id != b.box.class_id) return a.box.class_id < b.box.class_id;
    return a.order < b.order;
  });
  std::vector<GaussianBox> out;
  out.reserve(emitted.size());
  for (auto& e : emitted) out.push_back(e.box);
  return DetectionSet(std::move(out));
}

// Symmetric IoU matrix of one pool, row-major.
std::vector<double> pairwise_iou(std::span<const GaussianBox> boxes) {
  const std::size_t n = boxes.size();
  std::vector<CornerBox> corners(n);
  for (std::size_t i = 0; i < n; ++i) corners[i] = to_corners(boxes[i]);
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = iou(corners[i], corners[j]);
      m[i * n + j] = v;
      m[j * n + i] = v;
    }
  }
  return m;
}

// Core loop for one class group. `pool` lists RGB boxes first, then depth.
void fuse_group(std::span<const GaussianBox> pool, const FusionConfig& cfg,
                std::vector<Emitted>& out) {
  const std::size_t n = pool.size();
  if (n == 0) return;
  const std::vector<double> overlap = pairwise_iou(pool);

  std::vector<double> score(n);
  std::vector<char> alive(n);
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < n; ++i) {
    score[i] = pool[i].score;
    alive[i] = keeps(score[i], cfg);
    remaining += alive[i] ? 1 : 0;
  }

  while (remaining > 0) {
    std::size_t m = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i] && (m == n || score[i] > score[m])) m = i;
    }
    alive[m] = 0;
    --remaining;
    const double* row = &overlap[m * n];
    const Modality own = pool[m].modality;

    bool other_present = false;
    double best_other = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (!alive[t]) continue;
      score[t] = decay(score[t], row[t], cfg);
      if (!keeps(score[t], cfg)) {
        alive[t] = 0;
        --remaining;
        continue;
      }
      if (pool[t].modality != own) {
        other_present = true;
        best_other = std::max(best_other, row[t]);
      }
    }

    double gate = cfg.t1;
    bool same_modality_only = true;
    if (other_present && best_other >= cfg.t1) {
      gate = best_other >= cfg.t2 ? cfg.t2 : cfg.t1;
      same_modality_only = false;
    }

    PrecisionSum acc;
    for (std::size_t t = 0; t < n; ++t) {
      const bool member =
          t == m || (alive[t] && row[t] >= gate && (!same_modality_only || pool[t].modality == own));
      if (!member) continue;
      acc.add(pool[t]);
      if (t != m) {
        alive[t] = 0;
        --remaining;
      }
    }
    out.push_back({acc.result(pool[m], score[m]), out.size()});
  }
}

}  // namespace

DetectionSet standard_nms(const DetectionSet& dets, double iou_thresh, bool per_class) {
  const auto& boxes = dets.boxes();
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].score > boxes[b].score;
  });

  std::vector<CornerBox> kept_corners;
  std::vector<int> kept_class;
  std::vector<GaussianBox> kept;
  for (std::size_t idx : order) {
    const CornerBox c = to_corners(boxes[idx]);
    bool suppressed = false;
    for (std::size_t k = 0; k < kept.size() && !suppressed; ++k) {
      if (per_class && kept_class[k] != boxes[idx].class_id) continue;
      suppressed = iou(kept_corners[k], c) > iou_thresh;
    }
    if (suppressed) continue;
    kept.push_back(boxes[idx]);
    kept_corners.push_back(c);
    kept_class.push_back(boxes[idx].class_id);
  }
  return DetectionSet(std::move(kept));
}

GaussianBox softer_update(const GaussianBox& anchor, std::span<const GaussianBox> pool,
                          double gate) {
  const CornerBox a = to_corners(anchor);
  PrecisionSum acc;
  for (const auto& b : pool) {
    if (b.mu == anchor.mu || iou(a, to_corners(b)) > gate) acc.add(b);
  }
  if (acc.count() == 0) {
    throw InsufficientDataError("softer_update: no pool box passes the IoU gate");
  }
  return acc.result(anchor, anchor.score);
}

DetectionSet softer_nms(const DetectionSet& dets, const FusionConfig& cfg) {
  validate(cfg);
  std::vector<Emitted> emitted;
  for (auto& group : group_by_class(dets.boxes(), cfg.per_class)) {
    std::vector<GaussianBox> live;
    for (const auto& b : group) {
      if (keeps(b.score, cfg)) live.push_back(b);
    }
    while (!live.empty()) {
      auto best = std::max_element(live.begin(), live.end(), [](const auto& a, const auto& b) {
        return a.score < b.score;
      });
      // max_element returns the first maximum under operator<, which is the
      // lowest index among ties.
      const GaussianBox chosen = *best;
      const std::size_t m = static_cast<std::size_t>(best - live.begin());
      const CornerBox mc = to_corners(chosen);

      PrecisionSum acc;
      std::vector<GaussianBox> next;
      for (std::size_t t = 0; t < live.size(); ++t) {
        if (t == m) {
          acc.add(chosen);
          continue;
        }
        GaussianBox b = live[t];
        const double o = iou(mc, to_corners(b));
        b.score = decay(b.score, o, cfg);
        if (!keeps(b.score, cfg)) continue;
        if (o >= cfg.t1) {
          acc.add(live[t]);
        } else {
          next.push_back(b);
        }
      }
      emitted.push_back({acc.result(chosen, chosen.score), emitted.size()});
      live = std::move(next);
    }
  }
  return canonical_order(std::move(emitted));
}

DetectionSet multi_source_nms(const DetectionSet& rgb, const DetectionSet& depth,
                              const FusionConfig& cfg) {
  validate(cfg);
  std::vector<GaussianBox> pool;
  pool.reserve(rgb.size() + depth.size());
  for (auto b : rgb) {
    b.modality = Modality::kRgb;
    pool.push_back(b);
  }
  for (auto b : depth) {
    b.modality = Modality::kDepth;
    pool.push_back(b);
  }
  std::vector<Emitted> emitted;
  emitted.reserve(pool.size());
  // Grouping preserves order, so RGB still precedes depth inside each group.
  for (const auto& group : group_by_class(pool, cfg.per_class)) {
    fuse_group(group, cfg, emitted);
  }
  return canonical_order(std::move(emitted));
}

}  // namespace fuselage
