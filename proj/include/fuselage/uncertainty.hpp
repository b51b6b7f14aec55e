#pragma once

#include <span>
#include <vector>

#include "fuselage/geometry.hpp"

namespace fuselage {

// One regressed box against its ground truth.
struct LossSample {
  Vec4 target{};    // ground-truth (x, y, w, h)
  Vec4 pred_mu{};   // predicted mean
  Vec4 pred_var{1.0, 1.0, 1.0, 1.0};
  double gt_w_norm = 1.0;  // ground-truth size normalized to (0, 1]
  double gt_h_norm = 1.0;
  bool anchor_match = true;  // the prediction/anchor gate
};

// The grid of cells and anchors is flattened into `samples`.
struct LossBatch {
  std::vector<LossSample> samples;
  double epsilon = 1e-9;
};

struct LossGradient {
  Vec4 d_mu{};
  Vec4 d_var{};
};

void validate(const LossSample& s);

// Heteroscedastic regression loss: sum over the four coordinates of
// r^2 / (2 var) + log(var) / 2, with r = target - pred_mu.
double attenuated_loss(const LossSample& sample);
LossGradient attenuated_loss_grad(const LossSample& sample);

// Anchor weight (2 - w * h) * delta / 2.
double anchor_weight(const LossSample& sample);

// -weight * log(N(target | mu, var) + epsilon) for one coordinate.
double gaussian_nll_term(double target, double mu, double var, double weight, double epsilon);

// Weighted Gaussian negative log-likelihood summed over samples and
// coordinates. Terms may be negative when the density exceeds one.
double nll_loss(const LossBatch& batch);

struct RegressionPair {
  Vec4 pred_mu{};
  Vec4 pred_var{1.0, 1.0, 1.0, 1.0};
  Vec4 target{};
};

struct CalibrationBin {
  double expected = 0.0;
  double observed = 0.0;
  std::size_t count = 0;  // coordinates inside the interval
};

struct CalibrationCurve {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
  std::size_t total = 0;  // coordinates evaluated
};

// {0.05, 0.10, ..., 0.95}
std::vector<double> default_calibration_levels();

// For each level p, the fraction of coordinates whose target lies inside the
// central p-probability interval of N(pred_mu, pred_var). ece is the mean
// absolute gap between expected and observed coverage. Throws
// InsufficientDataError on empty input, ConfigError on bad levels.
CalibrationCurve ece_curve(std::span<const RegressionPair> pairs,
                           std::span<const double> levels);

struct Correlation {
  double r = 0.0;
  bool defined = false;  // false when either variate is constant
};

struct ScatterPoint {
  double iou = 0.0;
  double variance = 0.0;  // mean of the four coordinate variances
  double score = 0.0;
};

struct CorrelationStats {
  Correlation iou_variance;
  Correlation iou_score;
  Correlation variance_score;
  std::vector<ScatterPoint> scatter;
};

Correlation pearson(std::span<const double> a, std::span<const double> b);

// Each detection paired with the ground truth it overlaps most; detections
// with no overlapping ground truth are skipped.
std::vector<ScatterPoint> scatter_points(std::span<const GaussianBox> dets,
                                         std::span<const CornerBox> gts);

// Pearson coefficients over pooled points (e.g. from many frames). Throws
// InsufficientDataError with fewer than three points.
CorrelationStats correlation_stats(std::vector<ScatterPoint> scatter);

// Each detection is matched to the ground truth it overlaps most; detections
// with no overlapping ground truth are skipped. Throws
// InsufficientDataError with fewer than three matched pairs.
CorrelationStats correlation_stats(std::span<const GaussianBox> dets,
                                   std::span<const CornerBox> gts);

}  // namespace fuselage
