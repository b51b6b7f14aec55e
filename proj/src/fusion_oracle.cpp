// Literal transcription of the multi-source NMS loop, kept free of the
// optimizations in fusion_nms.cpp so the two can be checked against each
// other. Only iou() and decay() are shared.

#include <algorithm>
#include <limits>
#include <vector>

#include "fuselage/fusion_nms.hpp"

namespace fuselage {

namespace {

struct Entry {
  GaussianBox box;  // B
  double score;     // S
  bool in_pool;     // membership of T
};

GaussianBox weighted_fusion(const std::vector<const GaussianBox*>& members,
                            const GaussianBox& anchor, double score) {
  GaussianBox out = anchor;
  out.score = score;
  for (std::size_t c = 0; c < 4; ++c) {
    double num = 0.0;
    double den = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const GaussianBox* b : members) {
      num += b->mu[c] / b->var[c];
      den += 1.0 / b->var[c];
      lo = std::min(lo, b->mu[c]);
      hi = std::max(hi, b->mu[c]);
    }
    out.mu[c] = std::clamp(num / den, lo, hi);
    out.var[c] = members.size() == 1 ? members.front()->var[c] : 1.0 / den;
  }
  return out;
}

bool below_floor(double s, const FusionConfig& cfg) { return !(s > 0.0) || s < cfg.score_floor; }

std::vector<GaussianBox> run(std::vector<Entry> all, const FusionConfig& cfg) {
  std::vector<GaussianBox> detections;
  for (auto& e : all) {
    if (below_floor(e.score, cfg)) e.in_pool = false;
  }
  while (std::any_of(all.begin(), all.end(), [](const Entry& e) { return e.in_pool; })) {
    // m <- argmax S over T
    std::size_t m = all.size();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (!all[i].in_pool) continue;
      if (m == all.size() || all[i].score > all[m].score) m = i;
    }
    const GaussianBox chosen = all[m].box;
    all[m].in_pool = false;

    // S <- S f(IoU(M, T))
    for (auto& e : all) {
      if (!e.in_pool) continue;
      e.score = decay(e.score, iou(chosen, e.box), cfg);
      if (below_floor(e.score, cfg)) e.in_pool = false;
    }

    // Best overlap against the other modality still in T.
    bool other_empty = true;
    double best = 0.0;
    for (const auto& e : all) {
      if (e.in_pool && e.box.modality != chosen.modality) {
        other_empty = false;
        best = std::max(best, iou(chosen, e.box));
      }
    }

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (i == m) {
        idx.push_back(i);
        continue;
      }
      if (!all[i].in_pool) continue;
      const double o = iou(chosen, all[i].box);
      if (!other_empty && best >= cfg.t2) {
        if (o >= cfg.t2) idx.push_back(i);  // Case1
      } else if (!other_empty && best >= cfg.t1) {
        if (o >= cfg.t1) idx.push_back(i);  // Case2
      } else {
        if (all[i].box.modality == chosen.modality && o >= cfg.t1) idx.push_back(i);  // Case3
      }
    }

    std::vector<const GaussianBox*> members;
    for (std::size_t i : idx) members.push_back(&all[i].box);
    detections.push_back(weighted_fusion(members, chosen, all[m].score));
    for (std::size_t i : idx) all[i].in_pool = false;
  }
  return detections;
}

}  // namespace

DetectionSet oracle_multi_source_nms(const DetectionSet& rgb, const DetectionSet& depth,
                                     const FusionConfig& cfg) {
  validate(cfg);
  std::vector<int> classes;
  for (const auto& b : rgb) classes.push_back(b.class_id);
  for (const auto& b : depth) classes.push_back(b.class_id);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (!cfg.per_class && !classes.empty()) classes.assign(1, classes.front());

  struct Out {
    GaussianBox box;
    std::size_t order;
  };
  std::vector<Out> out;
  for (int cls : classes) {
    std::vector<Entry> all;
    for (auto b : rgb) {
      if (cfg.per_class && b.class_id != cls) continue;
      b.modality = Modality::kRgb;
      all.push_back({b, b.score, true});
    }
    for (auto b : depth) {
      if (cfg.per_class && b.class_id != cls) continue;
      b.modality = Modality::kDepth;
      all.push_back({b, b.score, true});
    }
    for (auto& d : run(std::move(all), cfg)) out.push_back({d, out.size()});
  }

  // Descending score, then class id, then emission order.
  for (std::size_t i = 1; i < out.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const auto& a = out[j - 1];
      const auto& b = out[j];
      const bool swap = a.box.score < b.box.score ||
                        (a.box.score == b.box.score && (a.box.class_id > b.box.class_id ||
                                                        (a.box.class_id == b.box.class_id &&
                                                         a.order > b.order)));
      if (!swap) break;
      std::swap(out[j - 1], out[j]);
    }
  }
  DetectionSet result;
  for (const auto& o : out) result.push_back(o.box);
  return result;
}

}  // namespace fuselage
