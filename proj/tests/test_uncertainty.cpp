#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fuselage/error.hpp"
#include "fuselage/uncertainty.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fuselage;
using fuselage::test::uniform;

namespace {

LossSample sample(double r, double var) {
  LossSample s;
  s.target = {r, 0, 0, 0};
  s.pred_mu = {0, 0, 0, 0};
  s.pred_var = {var, 1, 1, 1};
  return s;
}

// Coordinate c of `s`; the others are zero residuals at unit variance.
LossSample isolate(const LossSample& s, std::size_t c) {
  LossSample one;
  one.target[c] = s.target[c];
  one.pred_mu[c] = s.pred_mu[c];
  one.pred_var[c] = s.pred_var[c];
  return one;
}

}  // namespace

TEST_SUITE("uncertainty") {
  TEST_CASE("attenuated loss examples") {
    CHECK(attenuated_loss(sample(0, 1)) == 0.0);
    CHECK(attenuated_loss(sample(1, 1)) == doctest::Approx(0.5).epsilon(1e-15));
    const LossGradient g0 = attenuated_loss_grad(sample(0, 1));
    CHECK(g0.d_mu[0] == 0.0);
    const LossGradient g1 = attenuated_loss_grad(sample(1, 1));
    CHECK(g1.d_var[0] == 0.0);
    CHECK_THROWS_AS(attenuated_loss(sample(1, 0)), RangeError);
  }

  TEST_CASE("gradient matches central differences") {
    std::mt19937_64 rng(21);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      LossSample s;
      for (std::size_t c = 0; c < 4; ++c) {
        s.target[c] = uniform(rng, -20, 20);
        s.pred_mu[c] = uniform(rng, -20, 20);
        s.pred_var[c] = std::exp(uniform(rng, std::log(1e-3), std::log(1e3)));
      }
      const LossGradient g = attenuated_loss_grad(s);
      for (std::size_t c = 0; c < 4; ++c) {
        // The loss is a sum over coordinates; differencing one coordinate at
        // a time keeps the other terms from swamping the difference.
        const LossSample one = isolate(s, c);
        const double hm = 1e-6 * std::max(1.0, std::abs(s.pred_mu[c]));
        LossSample a = one, b = one;
        a.pred_mu[c] += hm;
        b.pred_mu[c] -= hm;
        const double fd_mu = (attenuated_loss(a) - attenuated_loss(b)) / (2 * hm);
        const double hv = 1e-6 * s.pred_var[c];
        a = one;
        b = one;
        a.pred_var[c] += hv;
        b.pred_var[c] -= hv;
        const double fd_var = (attenuated_loss(a) - attenuated_loss(b)) / (2 * hv);
        const double scale_mu = std::max(std::abs(g.d_mu[c]), std::abs(1.0 / s.pred_var[c]));
        const double scale_var =
            std::max(std::abs(g.d_var[c]), std::abs(1.0 / (2 * s.pred_var[c])));
        worst = std::max(worst, std::abs(fd_mu - g.d_mu[c]) / scale_mu);
        worst = std::max(worst, std::abs(fd_var - g.d_var[c]) / scale_var);
      }
    }
    CHECK(worst < 1e-5);
  }

  TEST_CASE("nll identity with unit weight and zero epsilon") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 200; ++i) {
      LossSample s;
      for (std::size_t c = 0; c < 4; ++c) {
        s.target[c] = uniform(rng, -3, 3);
        s.pred_var[c] = uniform(rng, 0.2, 5);
      }
      const double w = 1.0;
      double total = 0.0;
      for (std::size_t c = 0; c < 4; ++c) total += gaussian_nll_term(s.target[c], s.pred_mu[c], s.pred_var[c], w, 0.0);
      const double want = attenuated_loss(s) + 4 * 0.5 * std::log(2 * std::numbers::pi);
      CHECK(std::abs(total - want) <= 1e-10);
    }
  }

  TEST_CASE("nll hand value and gate") {
    LossSample s;
    s.gt_w_norm = 0.5;
    s.gt_h_norm = 0.5;
    const double per = -(2 - 0.25) / 2 * std::log(1 / std::sqrt(2 * std::numbers::pi) + 1e-9);
    CHECK(per == doctest::Approx(0.8041).epsilon(1e-4));
    CHECK(nll_loss({{s}, 1e-9}) == doctest::Approx(4 * per).epsilon(1e-14));
    s.anchor_match = false;
    s.target = {100, 100, 100, 100};
    CHECK(nll_loss({{s}, 1e-9}) == 0.0);
    CHECK(anchor_weight(s) == 0.0);
  }

  TEST_CASE("nll grows with the residual") {
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 40; ++k) {
      LossSample s;
      s.target = {0.1 * k, 0, 0, 0};
      const double v = nll_loss({{s}, 1e-9});
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("ece hand count") {
    const double sigma = 2.0;
    std::vector<RegressionPair> pairs;
    for (double r : {0.0, 0.0, 3 * sigma, 3 * sigma}) {
      RegressionPair p;
      p.pred_var = {sigma * sigma, sigma * sigma, sigma * sigma, sigma * sigma};
      p.target = {r, r, r, r};
      pairs.push_back(p);
    }
    const std::vector<double> level{0.5};
    const CalibrationCurve c = ece_curve(pairs, level);
    CHECK(c.bins.at(0).observed == 0.5);
    CHECK(c.total == 16);
  }

  TEST_CASE("ece degenerate overconfidence") {
    std::vector<RegressionPair> pairs(50);
    for (auto& p : pairs) {
      p.pred_var = {1e-300, 1e-300, 1e-300, 1e-300};
      p.target = {1, -1, 2, 0.5};
    }
    const auto levels = default_calibration_levels();
    const CalibrationCurve c = ece_curve(pairs, levels);
    double mean = 0;
    for (double l : levels) mean += l;
    mean /= static_cast<double>(levels.size());
    for (const auto& b : c.bins) CHECK(b.observed == 0.0);
    CHECK(c.ece == doctest::Approx(mean).epsilon(1e-12));
  }

  TEST_CASE("ece input validation") {
    const std::vector<double> levels{0.5};
    CHECK_THROWS_AS(ece_curve({}, levels), InsufficientDataError);
    std::vector<RegressionPair> one(1);
    const std::vector<double> bad{0.6, 0.4};
    CHECK_THROWS_AS(ece_curve(one, bad), ConfigError);
    CHECK(default_calibration_levels().size() == 19);
  }

  TEST_CASE("pearson agrees with the two-pass formula") {
    std::mt19937_64 rng(23);
    std::vector<double> a, b;
    for (int i = 0; i < 100; ++i) {
      a.push_back(uniform(rng, 0, 1));
      b.push_back(0.3 * a.back() + uniform(rng, 0, 1));
    }
    const Correlation c = pearson(a, b);
    CHECK(c.defined);
    CHECK(std::abs(c.r - oracle::pearson(a, b)) <= 1e-12);
  }

  TEST_CASE("correlation stats") {
    std::vector<GaussianBox> dets;
    std::vector<CornerBox> gts{{0, 0, 10, 10}};
    for (int i = 0; i < 20; ++i) {
      GaussianBox d = from_corners(CornerBox{0.2 * i, 0, 10 + 0.2 * i, 10});
      const double q = iou(to_corners(d), gts[0]);
      d.var = {1 - q + 0.5, 1 - q + 0.5, 1 - q + 0.5, 1 - q + 0.5};
      d.score = 0.5;
      dets.push_back(d);
    }
    const CorrelationStats s = correlation_stats(dets, gts);
    CHECK(s.iou_variance.defined);
    CHECK(s.iou_variance.r == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_FALSE(s.iou_score.defined);
    CHECK(std::isnan(s.iou_score.r));
    CHECK(s.scatter.size() == 20);
    CHECK_THROWS_AS(correlation_stats(std::vector<ScatterPoint>(2)), InsufficientDataError);
  }
}
