#include "fuselage/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "fuselage/error.hpp"

namespace fuselage {

namespace {

// Fixed-shape pairwise summation: the result depends only on the values and
// their order, never on how the work is split.
double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace

void validate(const LossSample& s) {
  for (std::size_t c = 0; c < 4; ++c) {
    if (!(s.pred_var[c] > 0.0) || !std::isfinite(s.pred_var[c])) {
      throw RangeError("loss sample variance must be positive and finite");
    }
  }
  if (!(s.gt_w_norm > 0.0 && s.gt_w_norm <= 1.0) || !(s.gt_h_norm > 0.0 && s.gt_h_norm <= 1.0)) {
    throw RangeError("normalized ground-truth size must lie in (0, 1]");
  }
}

double attenuated_loss(const LossSample& sample) {
  validate(sample);
  double total = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    const double r = sample.target[c] - sample.pred_mu[c];
    const double v = sample.pred_var[c];
    total += r * r / (2.0 * v) + 0.5 * std::log(v);
  }
  return total;
}

LossGradient attenuated_loss_grad(const LossSample& sample) {
  validate(sample);
  LossGradient g;
  for (std::size_t c = 0; c < 4; ++c) {
    const double r = sample.target[c] - sample.pred_mu[c];
    const double v = sample.pred_var[c];
    g.d_mu[c] = -r / v;
    g.d_var[c] = -r * r / (2.0 * v * v) + 1.0 / (2.0 * v);
  }
  return g;
}

double anchor_weight(const LossSample& sample) {
  if (!sample.anchor_match) return 0.0;
  return (2.0 - sample.gt_w_norm * sample.gt_h_norm) / 2.0;
}

double gaussian_nll_term(double target, double mu, double var, double weight, double epsilon) {
  if (weight == 0.0) return 0.0;
  const double r = target - mu;
  const double density = std::exp(-r * r / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  return -weight * std::log(density + epsilon);
}

double nll_loss(const LossBatch& batch) {
  if (!(batch.epsilon > 0.0)) throw RangeError("nll_loss: epsilon must be positive");
  std::vector<double> terms;
  terms.reserve(batch.samples.size() * 4);
  for (const auto& s : batch.samples) {
    validate(s);
    const double w = anchor_weight(s);
    for (std::size_t c = 0; c < 4; ++c) {
      terms.push_back(gaussian_nll_term(s.target[c], s.pred_mu[c], s.pred_var[c], w, batch.epsilon));
    }
  }
  return pairwise_sum(terms);
}

std::vector<double> default_calibration_levels() {
  std::vector<double> levels;
  for (int i = 1; i <= 19; ++i) levels.push_back(i / 20.0);
  return levels;
}

CalibrationCurve ece_curve(std::span<const RegressionPair> pairs, std::span<const double> levels) {
  if (pairs.empty()) throw InsufficientDataError("ece_curve: no regression pairs");
  if (levels.empty()) throw ConfigError("ece_curve: no calibration levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0) || (i > 0 && !(levels[i] > levels[i - 1]))) {
      throw ConfigError("ece_curve: levels must be strictly increasing inside (0, 1)");
    }
  }

  // Coverage probability of the smallest central interval containing each
  // target: erf(|r| / (sigma sqrt 2)). A target is inside the p-interval iff
  // that probability is at most p.
  std::vector<double> needed;
  needed.reserve(pairs.size() * 4);
  for (const auto& p : pairs) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double v = p.pred_var[c];
      if (!(v > 0.0)) throw RangeError("ece_curve: predicted variance must be positive");
      const double r = std::abs(p.target[c] - p.pred_mu[c]);
      needed.push_back(std::erf(r / std::sqrt(2.0 * v)));
    }
  }
  std::sort(needed.begin(), needed.end());

  CalibrationCurve curve;
  curve.total = needed.size();
  double gap = 0.0;
  for (double level : levels) {
    const auto inside =
        static_cast<std::size_t>(std::upper_bound(needed.begin(), needed.end(), level) -
                                 needed.begin());
    const double observed = static_cast<double>(inside) / static_cast<double>(needed.size());
    curve.bins.push_back({level, observed, inside});
    gap += std::abs(level - observed);
  }
  curve.ece = gap / static_cast<double>(levels.size());
  return curve;
}

Correlation pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("pearson: length mismatch");
  // Welford-style streaming co-moments.
  double mean_a = 0.0, mean_b = 0.0, m2a = 0.0, m2b = 0.0, cab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    mean_a += da / n;
    mean_b += db / n;
    m2a += da * (a[i] - mean_a);
    m2b += db * (b[i] - mean_b);
    cab += da * (b[i] - mean_b);
  }
  if (!(m2a > 0.0) || !(m2b > 0.0)) {
    return {std::numeric_limits<double>::quiet_NaN(), false};
  }
  return {std::clamp(cab / std::sqrt(m2a * m2b), -1.0, 1.0), true};
}

std::vector<ScatterPoint> scatter_points(std::span<const GaussianBox> dets,
                                         std::span<const CornerBox> gts) {
  std::vector<ScatterPoint> out;
  for (const auto& d : dets) {
    const CornerBox dc = to_corners(d);
    double best = 0.0;
    for (const auto& g : gts) best = std::max(best, iou(dc, g));
    if (best > 0.0) out.push_back({best, mean_variance(d), d.score});
  }
  return out;
}

CorrelationStats correlation_stats(std::vector<ScatterPoint> scatter) {
  if (scatter.size() < 3) {
    throw InsufficientDataError("correlation_stats: need at least 3 matched detections, got " +
                                std::to_string(scatter.size()));
  }
  CorrelationStats stats;
  std::vector<double> ious, vars, scores;
  for (const auto& p : scatter) {
    ious.push_back(p.iou);
    vars.push_back(p.variance);
    scores.push_back(p.score);
  }
  stats.iou_variance = pearson(ious, vars);
  stats.iou_score = pearson(ious, scores);
  stats.variance_score = pearson(vars, scores);
  stats.scatter = std::move(scatter);
  return stats;
}

CorrelationStats correlation_stats(std::span<const GaussianBox> dets,
                                   std::span<const CornerBox> gts) {
  return correlation_stats(scatter_points(dets, gts));
}

}  // namespace fuselage
