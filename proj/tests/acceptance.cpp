// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "fuselage/experiment.hpp"
#include "fuselage/io.hpp"
#include "fuselage/uncertainty.hpp"
#include "projection_fixture.hpp"
#include "support.hpp"

using namespace fuselage;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %-28s %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1 -------------------------------------------------------------------------

void oracle_equivalence() {
  std::mt19937_64 rng(0xACCE0001);
  const std::array<std::pair<double, double>, 2> gates{{{0.3, 0.5}, {0.45, 0.7}}};
  int mismatches = 0;
  const auto t0 = Clock::now();
  for (int f = 0; f < 10000; ++f) {
    FusionConfig cfg;
    const auto [t1, t2] = gates[rng() % 2];
    cfg.t1 = t1;
    cfg.t2 = t2;
    const DetectionSet rgb = test::random_set(rng, Modality::kRgb, 8, 2, 40.0);
    const DetectionSet depth = test::random_set(rng, Modality::kDepth, 8, 2, 40.0);
    if (!(multi_source_nms(rgb, depth, cfg) == oracle_multi_source_nms(rgb, depth, cfg))) {
      ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  report(1, "oracle equivalence", mismatches == 0 && secs < 60.0,
         fmt("mismatches=%d/10000 time=%.2fs (limit 60s)", mismatches, secs));
}

// 2 -------------------------------------------------------------------------

void hand_example() {
  const GaussianBox a = test::make_box(0, 0, 10, 10, 1, 0.9);
  const GaussianBox b = test::make_box(4, 0, 10, 10, 4, 0.6);
  const double x = softer_update(a, std::vector<GaussianBox>{a, b}, 0.0).mu[kX];
  const GaussianBox c = test::make_box(4, 0, 10, 10, 1, 0.6);
  const double mean = softer_update(a, std::vector<GaussianBox>{a, c}, 0.0).mu[kX];
  const bool pass = std::abs(x - 0.8) <= 1e-12 && mean == 2.0;
  report(2, "weighted-average example", pass,
         fmt("x=%.17g (want 0.8, tol 1e-12) equal-var x=%.17g (want 2 exactly)", x, mean));
}

// 3 -------------------------------------------------------------------------

void gradient_check() {
  std::mt19937_64 rng(0xACCE0003);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    LossSample s;
    for (std::size_t c = 0; c < 4; ++c) {
      s.target[c] = test::uniform(rng, -20, 20);
      s.pred_mu[c] = test::uniform(rng, -20, 20);
      s.pred_var[c] = std::exp(test::uniform(rng, std::log(1e-2), std::log(1e2)));
    }
    const LossGradient g = attenuated_loss_grad(s);
    for (std::size_t c = 0; c < 4; ++c) {
      // Difference one coordinate at a time: the loss is a sum, and the other
      // terms would otherwise swamp the difference in rounding.
      LossSample one;
      one.target[c] = s.target[c];
      one.pred_mu[c] = s.pred_mu[c];
      one.pred_var[c] = s.pred_var[c];
      for (int which = 0; which < 2; ++which) {
        LossSample hi = one, lo = one;
        double& ph = which ? hi.pred_var[c] : hi.pred_mu[c];
        double& pl = which ? lo.pred_var[c] : lo.pred_mu[c];
        const double base = which ? s.pred_var[c] : s.pred_mu[c];
        const double h = 1e-5 * std::max(std::abs(base), which ? 0.0 : 1.0);
        ph += h;
        pl -= h;
        const double fd = (attenuated_loss(hi) - attenuated_loss(lo)) / (2 * h);
        const double an = which ? g.d_var[c] : g.d_mu[c];
        // Relative to the larger of the two terms that make up the gradient.
        const double r2 = (s.target[c] - s.pred_mu[c]) * (s.target[c] - s.pred_mu[c]);
        const double scale = which ? std::max(r2 / (2 * base * base), 1 / (2 * base))
                                   : std::max(std::abs(an), 1 / s.pred_var[c]);
        worst = std::max(worst, std::abs(fd - an) / scale);
      }
    }
  }

  // Golden-section search over log variance for the minimizer of the loss in
  // one coordinate; it must land on var = r^2.
  double worst_stat = 0.0;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 100; ++i) {
    const double r = test::uniform(rng, 0.05, 30) * (rng() % 2 ? 1 : -1);
    LossSample s;
    s.target[0] = r;
    auto f = [&](double t) {
      LossSample q = s;
      q.pred_var[0] = std::exp(t);
      return attenuated_loss(q);
    };
    double a = std::log(r * r) - 5, b = std::log(r * r) + 5 + test::uniform(rng, 0, 1);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = f(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = f(x2);
      }
    }
    const double var = std::exp(0.5 * (a + b));
    worst_stat = std::max(worst_stat, std::abs(var - r * r) / (r * r));
  }
  report(3, "gradient check", worst < 1e-5 && worst_stat < 1e-6,
         fmt("fd max rel err=%.3g (limit 1e-5) stationary max rel err=%.3g (limit 1e-6)", worst,
             worst_stat));
}

// 4 -------------------------------------------------------------------------

void calibration() {
  std::mt19937_64 rng(0xACCE0004);
  std::normal_distribution<double> z;
  std::vector<RegressionPair> pairs(100000);
  for (auto& p : pairs) {
    for (std::size_t c = 0; c < 4; ++c) {
      p.pred_mu[c] = test::uniform(rng, -50, 50);
      p.pred_var[c] = std::exp(test::uniform(rng, std::log(0.1), std::log(50.0)));
      p.target[c] = p.pred_mu[c] + std::sqrt(p.pred_var[c]) * z(rng);
    }
  }
  const auto levels = default_calibration_levels();
  const double ece = ece_curve(pairs, levels).ece;

  std::vector<RegressionPair> over(1000);
  for (auto& p : over) {
    p.pred_var = {1e-300, 1e-300, 1e-300, 1e-300};
    for (auto& t : p.target) t = test::uniform(rng, 0.5, 5) * (rng() % 2 ? 1 : -1);
  }
  double max_observed = 0.0;
  for (const auto& b : ece_curve(over, levels).bins) max_observed = std::max(max_observed, b.observed);
  report(4, "calibration soundness", ece < 0.02 && max_observed == 0.0,
         fmt("ece=%.5f on 1e5 samples (limit 0.02) overconfident max observed=%g (want 0)", ece,
             max_observed));
}

// 5-7 -----------------------------------------------------------------------

void degradation(const DegradationGrid& g, double secs) {
  double worst_step = -1.0;
  bool strictly = true;
  bool overall = true;
  for (Scenario s : {Scenario::kRgb, Scenario::kDepth}) {
    for (CorruptionKind k : kAllCorruptions) {
      for (int level = 1; level < 5; ++level) {
        const double step = g.mAP(s, k, level + 1) - g.mAP(s, k, level);
        worst_step = std::max(worst_step, step);
        strictly = strictly && step < 0;
      }
      overall = overall && g.mAP(s, k, 5) < g.mAP(s, k, 1);
    }
  }
  report(5, "degradation trend", worst_step <= 0.005 && overall && secs < 300.0,
         fmt("largest step change=%+.4f (limit +0.005) strictly decreasing=%s grid time=%.1fs (limit 300s)",
             worst_step, strictly ? "yes" : "no", secs));
}

void fusion_robustness(const DegradationGrid& g) {
  double worst_ratio = 0.0;
  double worst_gap = 1.0;
  double worst_dominance = 1.0;
  for (CorruptionKind k : kAllCorruptions) {
    const double single_rgb = g.mAP(Scenario::kRgb, std::nullopt, 0) - g.mAP(Scenario::kRgb, k, 5);
    const double fused_nrd = g.mAP(Scenario::kNrD, std::nullopt, 0) - g.mAP(Scenario::kNrD, k, 5);
    const double single_d = g.mAP(Scenario::kDepth, std::nullopt, 0) - g.mAP(Scenario::kDepth, k, 5);
    const double fused_rnd = g.mAP(Scenario::kRNd, std::nullopt, 0) - g.mAP(Scenario::kRNd, k, 5);
    worst_ratio = std::max({worst_ratio, fused_nrd / single_rgb, fused_rnd / single_d});
    for (int level = 1; level <= 5; ++level) {
      worst_gap = std::min(worst_gap, g.mAP(Scenario::kNrD, k, level) - g.mAP(Scenario::kRgb, k, level));
      const double best_single =
          std::max(g.mAP(Scenario::kRgb, k, level), g.mAP(Scenario::kDepth, k, level));
      worst_dominance = std::min({worst_dominance, g.mAP(Scenario::kNrD, k, level) - best_single,
                                  g.mAP(Scenario::kRNd, k, level) - best_single});
    }
  }
  report(6, "fusion robustness", worst_ratio < 0.25 && worst_gap >= 0.0,
         fmt("max fused/single degradation=%.3f (limit 0.25) min NR-D minus RGB=%+.4f (want >= 0) "
             "min fused minus best single=%+.4f",
             worst_ratio, worst_gap, worst_dominance));
}

void selection_benefit(const DegradationGrid& g) {
  double margin = 1.0;
  std::string where;
  for (CorruptionKind k : kAllCorruptions) {
    for (int level = 3; level <= 5; ++level) {
      const double m = g.mAP(Scenario::kNrNd, k, level) - g.mAP(Scenario::kAvgNrNd, k, level);
      if (m < margin) {
        margin = m;
        where = std::string(corruption_name(k)) + "/" + std::to_string(level);
      }
    }
  }
  report(7, "selection benefit", margin >= 0.01,
         fmt("min NR-ND minus AvgFusion=%+.4f at %s (limit 0.01)", margin, where.c_str()));
}

// 8 -------------------------------------------------------------------------

#ifdef FUSELAGE_CLI_PATH
bool sh(const std::string& args) {
  const std::string cmd = "env -u FUSELAGE_SEED '" + std::string(FUSELAGE_CLI_PATH) + "' " + args +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

void cli_determinism(const fs::path& scratch) {
  const auto data = test::data_dir() / "projection";
  const std::string q = "'";
  bool ok = sh("project --velodyne " + q + (data / "velodyne").string() + q + " --calib " + q +
               (data / "calib").string() + q + " --out " + q + (scratch / "rasters").string() + q);
  fs::remove(scratch / "rasters" / "manifest.csv");
  auto pipeline = [&](const fs::path& out, int threads) {
    const std::string t = "--threads " + std::to_string(threads) + " ";
    const std::string o = q + out.string();
    return sh(t + "corrupt --in '" + (scratch / "rasters").string() + "' --out " + o +
              "/corrupt' --kind frost --level 4 --seed 11") &&
           sh(t + "simulate --frames 200 --kind motion_blur --level 3 --write-corpus --out " + o + "/sim'") &&
           sh(t + "simulate --frames 120 --grid --out " + o + "/grid'") &&
           sh(t + "fuse --rgb " + o + "/sim/rgb.txt' --depth " + o + "/sim/depth.txt' --out " + o +
              "/fused.txt'") &&
           sh(t + "eval --detections " + o + "/fused.txt' --labels " + o + "/sim/labels' --out " + o +
              "/eval.csv'");
  };
  ok = ok && pipeline(scratch / "a", 1) && pipeline(scratch / "b", 1) && pipeline(scratch / "c", 8);
  std::size_t files = 0;
  bool same_runs = false, same_threads = false;
  if (ok) {
    const auto a = tree(scratch / "a");
    files = a.size();
    same_runs = a == tree(scratch / "b");
    same_threads = a == tree(scratch / "c");
  }
  report(8, "CLI determinism", ok && files >= 10 && same_runs && same_threads,
         fmt("commands ok=%s files=%zu rerun identical=%s threads 1 vs 8 identical=%s",
             ok ? "yes" : "no", files, same_runs ? "yes" : "no", same_threads ? "yes" : "no"));
}
#endif

// 9 -------------------------------------------------------------------------

Mat3 random_rotation(std::mt19937_64& rng) {
  std::array<double, 4> q{};
  double n = 0;
  for (double& v : q) {
    v = test::uniform(rng, -1, 1);
    n += v * v;
  }
  for (double& v : q) v /= std::sqrt(n);
  const auto [w, x, y, z] = q;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

void round_trips(const fs::path& scratch) {
  std::mt19937_64 rng(0xACCE0009);
  const fs::path dir = scratch / "io";
  std::map<std::string, int> bad;
  for (int i = 0; i < 1000; ++i) {
    GroundTruthFrame f;
    f.frame_id = "frame";
    for (int k = 0, n = static_cast<int>(rng() % 9); k < n; ++k) {
      const double x = test::uniform(rng, 0, 1200), y = test::uniform(rng, 0, 350);
      f.objects.push_back({static_cast<int>(rng() % 3),
                           {x, y, x + test::uniform(rng, 0.01, 300), y + test::uniform(rng, 0.01, 200)}});
    }
    io::write_kitti_labels(dir / "frame.txt", f);
    const auto lf = io::read_kitti_labels(dir / "frame.txt");
    bad["labels"] += !(lf.frame == f && lf.errors.empty());

    PointCloud cloud;
    for (int k = 0, n = static_cast<int>(rng() % 64); k < n; ++k) {
      cloud.points.push_back({static_cast<float>(test::uniform(rng, -80, 80)),
                              static_cast<float>(test::uniform(rng, -80, 80)),
                              static_cast<float>(test::uniform(rng, -5, 5)),
                              static_cast<float>(test::uniform(rng, 0, 1))});
    }
    io::write_velodyne(dir / "cloud.bin", cloud);
    const auto cb = io::read_velodyne(dir / "cloud.bin");
    bool same = cb.points.size() == cloud.points.size();
    for (std::size_t k = 0; same && k < cloud.points.size(); ++k) {
      same = cb.points[k].x == cloud.points[k].x && cb.points[k].y == cloud.points[k].y &&
             cb.points[k].z == cloud.points[k].z && cb.points[k].intensity == cloud.points[k].intensity;
    }
    bad["velodyne"] += !same;

    CalibMatrices c;
    c.K = {{{test::uniform(rng, 300, 900), 0, test::uniform(rng, 200, 700)},
            {0, test::uniform(rng, 300, 900), test::uniform(rng, 100, 250)},
            {0, 0, 1}}};
    c.R = random_rotation(rng);
    c.T = {test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)};
    io::write_calib(dir / "calib.txt", c);
    const auto cc = io::read_calib(dir / "calib.txt");
    bad["calib"] += !(cc.K == c.K && cc.R == c.R && cc.T == c.T);

    const int channels = i % 2 ? 3 : 1;
    const int maxval = i % 3 ? 255 : io::kDepthMaxval;
    Raster img(1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 30), channels);
    for (auto& v : img.data) v = static_cast<float>(static_cast<double>(rng() % (maxval + 1)) / maxval);
    io::write_pnm(dir / "img.pnm", img, maxval);
    const auto rf = io::read_pnm(dir / "img.pnm");
    bad["raster"] += !(rf.raster == img && rf.maxval == maxval);

    std::vector<io::DetectionRecord> recs;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 5); k < n; ++k) {
      GaussianBox b = test::random_box(rng, rng() % 2 ? Modality::kRgb : Modality::kDepth, 3, 1000);
      b.var[0] = std::ldexp(b.var[0], static_cast<int>(rng() % 60) - 30);
      recs.push_back({"f" + std::to_string(k), b});
    }
    io::write_detections(dir / "dets.txt", recs);
    bad["detections"] += !(io::read_detections(dir / "dets.txt") == recs);
  }
  int total_bad = 0;
  for (const auto& [_, n] : bad) total_bad += n;

  double worst_ray = 0.0;
  int mismatched = 0, filled = 0;
  for (const char* id : {"000000", "000001", "000002"}) {
    const auto r = test::check_fixture_frame(id);
    worst_ray = std::max({worst_ray, r.worst_ray, r.worst_depth});
    mismatched += r.mismatched;
    filled += r.filled;
  }
  report(9, "round trips", total_bad == 0 && mismatched == 0 && worst_ray < 1e-6,
         fmt("lossy: labels=%d velodyne=%d calib=%d raster=%d detections=%d (of 1000 each) "
             "ray rel err=%.3g over %d pixels (limit 1e-6)",
             bad["labels"], bad["velodyne"], bad["calib"], bad["raster"], bad["detections"],
             worst_ray, filled));
}

// 10 ------------------------------------------------------------------------

void performance() {
  std::mt19937_64 rng(0xACCE0010);
  struct Frame {
    DetectionSet rgb, depth;
  };
  std::vector<Frame> frames(10000);
  for (auto& f : frames) {
    // 15 objects seen by both modalities plus clutter: 100 boxes per frame.
    std::vector<GaussianBox> objects(15);
    for (auto& o : objects) o = test::random_box(rng, Modality::kRgb, 3, 1000);
    for (int k = 0; k < 100; ++k) {
      const Modality m = k % 2 ? Modality::kDepth : Modality::kRgb;
      GaussianBox b;
      if (k < 90) {
        b = objects[static_cast<std::size_t>(k) % objects.size()];
        for (std::size_t c = 0; c < 4; ++c) b.mu[c] += test::uniform(rng, -2, 2);
        b.score = test::uniform(rng, 0.05, 1);
      } else {
        b = test::random_box(rng, m, 3, 1000);
      }
      b.modality = m;
      (m == Modality::kRgb ? f.rgb : f.depth).push_back(b);
    }
  }
  const FusionConfig cfg = FusionConfig::experiment();
  std::size_t kept = 0;
  const auto t0 = Clock::now();
  for (const auto& f : frames) kept += multi_source_nms(f.rgb, f.depth, cfg).size();
  const double secs = seconds_since(t0);
  report(10, "performance floor", secs < 2.0,
         fmt("1e4 frames x 100 boxes in %.3fs (limit 2s), %zu boxes kept", secs, kept));
}

}  // namespace

int main() {
  const fs::path scratch =
      fs::temp_directory_path() / ("fuselage_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(scratch);

  oracle_equivalence();
  hand_example();
  gradient_check();
  calibration();

  const auto labels = io::read_label_dir(test::data_dir() / "golden_corpus");
  std::vector<GroundTruthFrame> corpus;
  for (const auto& lf : labels) corpus.push_back(lf.frame);
  const auto t0 = Clock::now();
  const DegradationGrid grid = run_degradation_grid(corpus, SimDetectorSpec::rgb_default(),
                                                    SimDetectorSpec::depth_default());
  const double grid_secs = seconds_since(t0);
  degradation(grid, grid_secs);
  fusion_robustness(grid);
  selection_benefit(grid);

#ifdef FUSELAGE_CLI_PATH
  cli_determinism(scratch);
#else
  report(8, "CLI determinism", false, "built without the command-line tool");
#endif
  round_trips(scratch);
  performance();

  fs::remove_all(scratch);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
