#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "detector_config.hpp"
#include "fuselage/corruption.hpp"
#include "fuselage/error.hpp"
#include "fuselage/eval.hpp"
#include "fuselage/experiment.hpp"
#include "fuselage/fusion_nms.hpp"
#include "fuselage/io.hpp"
#include "fuselage/parallel.hpp"
#include "fuselage/philox.hpp"
#include "fuselage/plot.hpp"
#include "fuselage/projection.hpp"
#include "fuselage/simulator.hpp"
#include "fuselage/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace fuselage;

namespace {

constexpr std::uint64_t kGoldenCorpusSeed = 0xC0FFEE;

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string checksum(std::span<const std::byte> bytes) {
  return hex32(fnv1a32({reinterpret_cast<const char*>(bytes.data()), bytes.size()}));
}

std::string real6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_bytes(path, {reinterpret_cast<const std::byte*>(text.data()), text.size()});
}

// Flag, then FUSELAGE_SEED, then the built-in default.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FUSELAGE_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 0);
    if (end == env || *end != '\0') {
      throw ConfigError(std::string("FUSELAGE_SEED is not an integer: '") + env + "'");
    }
    return v;
  }
  return fallback;
}

std::optional<std::uint64_t> env_or_flag_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("FUSELAGE_SEED"); env && *env) return resolve_seed({}, 0);
  return std::nullopt;
}

// Strict: any malformed label line aborts with its file and line.
std::vector<GroundTruthFrame> load_labels(const fs::path& dir, bool lenient) {
  std::vector<GroundTruthFrame> out;
  for (auto& lf : io::read_label_dir(dir)) {
    const fs::path file = dir / (lf.frame.frame_id + ".txt");
    for (const auto& e : lf.errors) {
      if (!lenient) throw ParseError(file.string(), e.line, e.message);
      std::cerr << "warning: " << file.string() << ":" << e.line << ": " << e.message << "\n";
    }
    if (lf.degenerate > 0) {
      std::cerr << "warning: " << file.string() << ": skipped " << lf.degenerate
                << " degenerate box(es)\n";
    }
    out.push_back(std::move(lf.frame));
  }
  return out;
}

// Detections aligned with `frames`; records for unknown frames are an error.
std::vector<DetectionSet> align_detections(const std::vector<io::DetectionRecord>& records,
                                           const std::vector<GroundTruthFrame>& frames,
                                           const std::string& source) {
  auto grouped = io::group_by_frame(records);
  std::vector<DetectionSet> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto it = grouped.find(frames[i].frame_id);
    if (it == grouped.end()) continue;
    out[i] = std::move(it->second);
    grouped.erase(it);
  }
  if (!grouped.empty()) {
    throw ConfigError(source + ": frame '" + grouped.begin()->first +
                      "' has detections but no label file");
  }
  return out;
}

// ------------------------------------------------------------------ fusion flags

struct FusionFlags {
  std::string preset = "experiment";
  std::optional<double> t1, t2, sigma, floor, nms_iou;
  std::string decay;
  bool no_per_class = false;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "Gate pair preset: experiment (0.45, 0.7) or reference (0.3, 0.5)")
        ->check(CLI::IsMember({"experiment", "reference"}))
        ->capture_default_str();
    app->add_option("--t1", t1, "Low IoU gate (overrides the preset)")->check(CLI::Range(0.0, 1.0));
    app->add_option("--t2", t2, "High IoU gate (overrides the preset)")->check(CLI::Range(0.0, 1.0));
    app->add_option("--decay", decay, "Score decay: linear or gaussian [gaussian]")
        ->check(CLI::IsMember({"linear", "gaussian"}));
    app->add_option("--sigma", sigma, "Gaussian decay width [0.5]")->check(CLI::PositiveNumber);
    app->add_option("--score-floor", floor, "Drop boxes whose decayed score falls below [0.01]")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--nms-iou", nms_iou, "IoU threshold of single-modal NMS [0.45]")
        ->check(CLI::Range(0.0, 1.0));
    app->add_flag("--no-per-class", no_per_class, "Let boxes of different classes interact");
  }

  FusionConfig build() const {
    FusionConfig cfg = preset == "reference" ? FusionConfig::reference() : FusionConfig::experiment();
    if (t1) cfg.t1 = *t1;
    if (t2) cfg.t2 = *t2;
    if (!decay.empty()) cfg.decay = decay == "linear" ? DecayKind::kLinear : DecayKind::kGaussian;
    if (sigma) cfg.sigma_s = *sigma;
    if (floor) cfg.score_floor = *floor;
    if (nms_iou) cfg.single_modal_nms_iou = *nms_iou;
    cfg.per_class = !no_per_class;
    validate(cfg);
    return cfg;
  }
};

// ------------------------------------------------------------------ project

struct ProjectArgs {
  fs::path velodyne, calib, out;
  ProjectionOptions opts;
  unsigned threads = 0;
};

int cmd_project(const ProjectArgs& a) {
  validate(a.opts);
  const auto clouds = io::list_files(a.velodyne, ".bin");
  std::vector<fs::path> calibs;
  for (const auto& c : clouds) {
    fs::path p = a.calib / (c.stem().string() + ".txt");
    if (!fs::is_regular_file(p)) {
      throw ConfigError("missing calibration for " + c.string() + ": " + p.string());
    }
    calibs.push_back(std::move(p));
  }
  fs::create_directories(a.out);
  std::vector<std::string> rows(clouds.size());
  parallel_for(clouds.size(), a.threads, [&](std::size_t i) {
    const PointCloud cloud = io::read_velodyne(clouds[i]);
    const CalibMatrices calib = io::read_calib(calibs[i]);
    DepthImage img;
    try {
      img = project_points(cloud, calib, a.opts);
    } catch (const CalibrationError& e) {
      throw CalibrationError(calibs[i].string() + ": " + e.what());
    }
    const auto bytes = io::encode_pnm(img, io::kDepthMaxval);
    const std::string stem = clouds[i].stem().string();
    io::write_bytes(a.out / (stem + ".pgm"), bytes);
    const auto filled = std::count_if(img.data.begin(), img.data.end(), [](float v) { return v > 0.0f; });
    rows[i] = stem + "," + stem + ".pgm," + std::to_string(cloud.points.size()) + "," +
              std::to_string(filled) + "," + checksum(bytes) + "\n";
  });
  std::string manifest = "frame_id,file,points,filled_pixels,fnv1a32\n";
  for (const auto& r : rows) manifest += r;
  write_text(a.out / "manifest.csv", manifest);
  std::cout << "projected " << clouds.size() << " frame(s) into " << a.out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ corrupt

struct CorruptArgs {
  fs::path in, out;
  std::string kind = "gaussian_noise";
  int level = 1;
  std::optional<std::uint64_t> seed;
  double angle = 0.0;
  unsigned threads = 0;
};

int cmd_corrupt(const CorruptArgs& a) {
  const CorruptionKind kind = parse_corruption(a.kind);
  const std::uint64_t seed = resolve_seed(a.seed, 0);
  std::vector<fs::path> files = io::list_files(a.in, ".pgm");
  const auto ppm = io::list_files(a.in, ".ppm");
  files.insert(files.end(), ppm.begin(), ppm.end());
  std::sort(files.begin(), files.end());
  fs::create_directories(a.out);
  if (fs::equivalent(a.in, a.out)) throw ConfigError("--out must differ from --in");

  std::vector<std::string> rows(files.size());
  parallel_for(files.size(), a.threads, [&](std::size_t i) {
    const std::string name = files[i].filename().string();
    const auto bytes = io::read_bytes(files[i]);
    const std::uint64_t file_seed = mix_seed(seed, fnv1a32(name));
    std::vector<std::byte> result;
    if (a.level == 0) {
      result = bytes;
    } else {
      const auto rf = io::parse_pnm(bytes, files[i].string());
      const CorruptionSpec spec{kind, a.level, file_seed, a.angle};
      result = io::encode_pnm(corrupt(rf.raster, spec), rf.maxval);
    }
    io::write_bytes(a.out / name, result);
    rows[i] = name + "," + std::string(corruption_name(kind)) + "," + std::to_string(a.level) + "," +
              std::to_string(file_seed) + "," + checksum(result) + "\n";
  });
  std::string manifest = "file,kind,level,seed,fnv1a32\n";
  for (const auto& r : rows) manifest += r;
  write_text(a.out / "manifest.csv", manifest);
  std::cout << "corrupted " << files.size() << " image(s) into " << a.out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ fuse

struct FuseArgs {
  fs::path rgb, depth, out;
  FusionFlags fusion;
  unsigned threads = 0;
};

int cmd_fuse(const FuseArgs& a) {
  const FusionConfig cfg = a.fusion.build();
  const auto rgb = io::group_by_frame(io::read_detections(a.rgb));
  const auto depth = io::group_by_frame(io::read_detections(a.depth));
  std::vector<std::string> frames;
  for (const auto& [id, _] : rgb) frames.push_back(id);
  for (const auto& [id, _] : depth) frames.push_back(id);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  const DetectionSet empty;
  std::vector<DetectionSet> fused(frames.size());
  parallel_for(frames.size(), a.threads, [&](std::size_t i) {
    const auto r = rgb.find(frames[i]);
    const auto d = depth.find(frames[i]);
    fused[i] = multi_source_nms(r == rgb.end() ? empty : r->second,
                                d == depth.end() ? empty : d->second, cfg);
  });
  std::vector<io::DetectionRecord> records;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto part = io::to_records(frames[i], fused[i]);
    records.insert(records.end(), part.begin(), part.end());
  }
  io::write_detections(a.out, records);
  std::cout << "fused " << frames.size() << " frame(s), " << records.size() << " box(es)\n";
  return 0;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  fs::path detections, labels, out;
  double iou_gate = 0.5;
  std::string scenario = "detections";
  std::string noise_kind = "none";
  int level = 0;
  bool lenient = false;
  unsigned threads = 0;
};

int cmd_eval(const EvalArgs& a) {
  const auto gts = load_labels(a.labels, a.lenient);
  const auto dets = align_detections(io::read_detections(a.detections), gts, a.detections.string());
  std::vector<FrameEvaluation> frames(gts.size());
  parallel_for(gts.size(), a.threads, [&](std::size_t i) {
    frames[i] = evaluate_frame(dets[i].boxes(), gts[i], a.iou_gate);
  });
  const EvalReport report = summarize(frames);
  std::ostringstream csv;
  csv << kReportCsvHeader << "\n";
  write_report_rows(csv, a.scenario, a.noise_kind, a.level, report);
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(a.out, csv.str());
    std::cout << "mAP " << real6(report.mAP) << " over " << gts.size() << " frame(s)\n";
  }
  return 0;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  fs::path labels, out, rgb_config, depth_config;
  std::size_t frames = 500;
  std::uint64_t corpus_seed = kGoldenCorpusSeed;
  std::string kind = "none";
  int level = 0;
  bool grid = false;
  bool write_corpus = false;
  bool dump_config = false;
  bool svg = false;
  bool lenient = false;
  double iou_gate = 0.5;
  std::optional<std::uint64_t> seed;
  FusionFlags fusion;
  unsigned threads = 0;
};

void write_grid_svgs(const fs::path& dir, const DegradationGrid& grid,
                     const std::vector<CorruptionKind>& kinds) {
  for (CorruptionKind k : kinds) {
    std::vector<Series> series;
    for (Scenario s : kAllScenarios) {
      Series line{std::string(scenario_name(s)), {}};
      for (int level = 0; level <= kMaxSeverity; ++level) {
        if (const GridCell* c = grid.find(s, k, level)) line.points.emplace_back(level, c->report.mAP);
      }
      series.push_back(std::move(line));
    }
    const std::string name(corruption_name(k));
    write_text(dir / ("grid_" + name + ".svg"),
               svg_line_plot({"mAP under " + name, "severity", "mAP"}, series));
  }
}

int cmd_simulate(const SimulateArgs& a) {
  const FusionConfig cfg = a.fusion.build();
  std::optional<CorruptionKind> kind;
  if (a.kind != "none") kind = parse_corruption(a.kind);
  if (!a.grid && (kind.has_value() != (a.level > 0))) {
    throw ConfigError("--kind none requires --level 0 and a corruption kind requires --level 1..5");
  }

  SimDetectorSpec rgb = SimDetectorSpec::rgb_default();
  SimDetectorSpec depth = SimDetectorSpec::depth_default();
  GridOptions opts;
  opts.fusion = cfg;
  opts.iou_gate = a.iou_gate;
  opts.threads = a.threads;
  if (const auto seed = env_or_flag_seed(a.seed)) {
    rgb.seed = mix_seed(*seed, 0);
    depth.seed = mix_seed(*seed, 1);
    opts.avg_seed = mix_seed(*seed, 2);
  }
  if (!a.rgb_config.empty()) rgb = cli::load_detector_config(a.rgb_config, rgb);
  if (!a.depth_config.empty()) depth = cli::load_detector_config(a.depth_config, depth);
  validate(rgb);
  validate(depth);

  const std::vector<GroundTruthFrame> corpus =
      a.labels.empty() ? generate_corpus(a.frames, a.corpus_seed) : load_labels(a.labels, a.lenient);
  if (corpus.empty()) throw InsufficientDataError("simulate: the corpus has no frames");
  for (const auto& f : corpus) validate(f);
  fs::create_directories(a.out);

  if (a.write_corpus) {
    fs::create_directories(a.out / "labels");
    parallel_for(corpus.size(), a.threads, [&](std::size_t i) {
      io::write_kitti_labels(a.out / "labels" / (corpus[i].frame_id + ".txt"), corpus[i]);
    });
  }
  if (a.dump_config) {
    write_text(a.out / "rgb_detector.json", cli::dump_detector_config(rgb));
    write_text(a.out / "depth_detector.json", cli::dump_detector_config(depth));
  }

  if (a.grid) {
    const DegradationGrid grid = run_degradation_grid(corpus, rgb, depth, opts);
    write_text(a.out / "grid.csv", format_grid_csv(grid));
    if (a.svg) write_grid_svgs(a.out, grid, opts.kinds);
    std::cout << "wrote " << grid.cells.size() << " grid cell(s) to " << (a.out / "grid.csv").string()
              << "\n";
    return 0;
  }

  const Condition cond{kind, a.level};
  const CorruptionSpec spec = cond.spec();
  std::vector<DetectionSet> rgb_dets(corpus.size()), depth_dets(corpus.size());
  parallel_for(corpus.size(), a.threads, [&](std::size_t i) {
    rgb_dets[i] = simulate_detections(corpus[i], rgb, spec);
    depth_dets[i] = simulate_detections(corpus[i], depth, spec);
  });
  std::vector<io::DetectionRecord> rgb_rec, depth_rec;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto r = io::to_records(corpus[i].frame_id, rgb_dets[i]);
    const auto d = io::to_records(corpus[i].frame_id, depth_dets[i]);
    rgb_rec.insert(rgb_rec.end(), r.begin(), r.end());
    depth_rec.insert(depth_rec.end(), d.begin(), d.end());
  }
  io::write_detections(a.out / "rgb.txt", rgb_rec);
  io::write_detections(a.out / "depth.txt", depth_rec);

  // Both modalities see the same corruption here, so only the single-modal
  // and both-noisy scenarios are meaningful.
  const auto cells = evaluate_condition(corpus, rgb, depth, cond, opts);
  std::ostringstream csv;
  csv << kReportCsvHeader << "\n";
  for (const auto& c : cells) {
    if (c.scenario == Scenario::kRgb || c.scenario == Scenario::kDepth ||
        c.scenario == Scenario::kNrNd || c.scenario == Scenario::kAvgNrNd) {
      write_report_rows(csv, scenario_name(c.scenario), cond.kind_name(), cond.level, c.report);
    }
  }
  write_text(a.out / "report.csv", csv.str());
  std::cout << "simulated " << corpus.size() << " frame(s) under " << cond.kind_name() << " level "
            << cond.level << "\n";
  return 0;
}

// ------------------------------------------------------------------ calibrate

struct CalibrateArgs {
  fs::path detections, labels, out;
  double iou_gate = 0.5;
  bool svg = false;
  bool lenient = false;
  unsigned threads = 0;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const auto gts = load_labels(a.labels, a.lenient);
  const auto dets = align_detections(io::read_detections(a.detections), gts, a.detections.string());

  std::vector<std::vector<RegressionPair>> pairs(gts.size());
  std::vector<std::vector<ScatterPoint>> scatter(gts.size());
  parallel_for(gts.size(), a.threads, [&](std::size_t i) {
    // Every detection is scored against the same-class ground truth it
    // overlaps most. One-to-one matching would keep only the best-scored
    // candidate per object and bias coverage upwards.
    for (const auto& d : dets[i]) {
      const CornerBox dc = to_corners(d);
      const GroundTruthObject* best = nullptr;
      double best_iou = a.iou_gate;
      for (const auto& o : gts[i].objects) {
        if (o.class_id != d.class_id) continue;
        const double v = iou(dc, o.box);
        if (v >= best_iou) {
          best_iou = v;
          best = &o;
        }
      }
      if (best) pairs[i].push_back({d.mu, d.var, from_corners(best->box).mu});
    }
    std::vector<CornerBox> boxes;
    for (const auto& o : gts[i].objects) boxes.push_back(o.box);
    scatter[i] = scatter_points(dets[i].boxes(), boxes);
  });
  std::vector<RegressionPair> all_pairs;
  std::vector<ScatterPoint> all_points;
  std::vector<std::string> point_frame;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    all_pairs.insert(all_pairs.end(), pairs[i].begin(), pairs[i].end());
    all_points.insert(all_points.end(), scatter[i].begin(), scatter[i].end());
    point_frame.insert(point_frame.end(), scatter[i].size(), gts[i].frame_id);
  }

  const auto levels = default_calibration_levels();
  const CalibrationCurve curve = ece_curve(all_pairs, levels);
  const CorrelationStats stats = correlation_stats(all_points);

  fs::create_directories(a.out);
  std::string ece = "expected,observed,count,total\n";
  for (const auto& b : curve.bins) {
    ece += real6(b.expected) + "," + real6(b.observed) + "," + std::to_string(b.count) + "," +
           std::to_string(curve.total) + "\n";
  }
  write_text(a.out / "ece.csv", ece);

  std::string sc = "frame_id,iou,variance,score\n";
  for (std::size_t i = 0; i < all_points.size(); ++i) {
    sc += point_frame[i] + "," + io::format_real(all_points[i].iou) + "," +
          io::format_real(all_points[i].variance) + "," + io::format_real(all_points[i].score) + "\n";
  }
  write_text(a.out / "scatter.csv", sc);

  auto r = [](const Correlation& c) { return c.defined ? real6(c.r) : std::string(); };
  write_text(a.out / "summary.csv",
             "ece,coordinates,pearson_iou_variance,pearson_iou_score,pearson_variance_score\n" +
                 real6(curve.ece) + "," + std::to_string(curve.total) + "," + r(stats.iou_variance) +
                 "," + r(stats.iou_score) + "," + r(stats.variance_score) + "\n");

  if (a.svg) {
    Series ideal{"ideal", {{0.0, 0.0}, {1.0, 1.0}}};
    Series observed{"observed", {}};
    for (const auto& b : curve.bins) observed.points.emplace_back(b.expected, b.observed);
    const std::vector<Series> calib{ideal, observed};
    write_text(a.out / "calibration.svg",
               svg_line_plot({"Calibration", "expected coverage", "observed coverage"}, calib));
    Series iv{"detections", {}}, is{"detections", {}};
    for (const auto& p : all_points) {
      iv.points.emplace_back(p.iou, p.variance);
      is.points.emplace_back(p.iou, p.score);
    }
    write_text(a.out / "scatter_iou_variance.svg",
               svg_scatter_plot({"IoU vs variance", "IoU", "mean variance"}, std::vector<Series>{iv}));
    write_text(a.out / "scatter_iou_score.svg",
               svg_scatter_plot({"IoU vs score", "IoU", "score"}, std::vector<Series>{is}));
  }
  std::cout << "ece " << real6(curve.ece) << " over " << curve.total << " coordinate(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-aware fusion of RGB and depth detections"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();

  ProjectArgs project;
  auto* p = app.add_subcommand("project", "Project velodyne scans into normalized depth rasters");
  p->add_option("--velodyne", project.velodyne, "Directory of *.bin scans")->required()->check(CLI::ExistingDirectory);
  p->add_option("--calib", project.calib, "Directory of KITTI calib *.txt files")->required()->check(CLI::ExistingDirectory);
  p->add_option("--out", project.out, "Output directory for 16-bit PGMs and manifest.csv")->required();
  p->add_option("--width", project.opts.out_width, "Output width")->capture_default_str()->check(CLI::PositiveNumber);
  p->add_option("--height", project.opts.out_height, "Output height")->capture_default_str()->check(CLI::PositiveNumber);
  p->add_option("--image-width", project.opts.image_width, "Full image width (0 = no crop)")->capture_default_str()->check(CLI::NonNegativeNumber);
  p->add_option("--image-height", project.opts.image_height, "Full image height (0 = no crop)")->capture_default_str()->check(CLI::NonNegativeNumber);
  p->add_option("--max-range", project.opts.max_range, "Depth mapped to 1.0, metres")->capture_default_str()->check(CLI::PositiveNumber);

  CorruptArgs corrupt_args;
  auto* c = app.add_subcommand("corrupt", "Apply a corruption at one severity to every PGM/PPM");
  c->add_option("--in", corrupt_args.in, "Input raster directory")->required()->check(CLI::ExistingDirectory);
  c->add_option("--out", corrupt_args.out, "Output directory")->required();
  c->add_option("--kind", corrupt_args.kind, "gaussian_noise, motion_blur or frost")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian_noise", "gaussian", "motion_blur", "motion", "frost"}));
  c->add_option("--level", corrupt_args.level, "Severity 0-5 (0 copies the input)")->capture_default_str()->check(CLI::Range(0, 5));
  c->add_option("--seed", corrupt_args.seed, "Base seed (falls back to FUSELAGE_SEED, then 0)");
  c->add_option("--angle", corrupt_args.angle, "Motion blur direction, degrees")->capture_default_str();

  FuseArgs fuse;
  auto* f = app.add_subcommand("fuse", "Multi-source NMS over RGB and depth detection files");
  f->add_option("--rgb", fuse.rgb, "RGB detections")->required()->check(CLI::ExistingFile);
  f->add_option("--depth", fuse.depth, "Depth detections")->required()->check(CLI::ExistingFile);
  f->add_option("--out", fuse.out, "Fused detections")->required();
  fuse.fusion.add(f);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Per-class AP and mAP of a detection file against KITTI labels");
  e->add_option("--detections", eval.detections, "Detection file")->required()->check(CLI::ExistingFile);
  e->add_option("--labels", eval.labels, "Directory of KITTI label files")->required()->check(CLI::ExistingDirectory);
  e->add_option("--out", eval.out, "CSV report (default: stdout)");
  e->add_option("--iou-gate", eval.iou_gate, "Matching IoU")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  e->add_option("--scenario", eval.scenario, "Value of the scenario column")->capture_default_str();
  e->add_option("--noise-kind", eval.noise_kind, "Value of the noise_kind column")->capture_default_str();
  e->add_option("--level", eval.level, "Value of the level column")->capture_default_str()->check(CLI::Range(0, 5));
  e->add_flag("--lenient", eval.lenient, "Skip malformed label lines with a warning");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Synthetic RGB/depth detectors and the degradation grid");
  s->add_option("--labels", sim.labels, "KITTI label directory (default: the generated corpus)")->check(CLI::ExistingDirectory);
  s->add_option("--frames", sim.frames, "Generated corpus size")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--corpus-seed", sim.corpus_seed, "Generated corpus seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--kind", sim.kind, "none, gaussian_noise, motion_blur or frost")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "gaussian_noise", "gaussian", "motion_blur", "motion", "frost"}));
  s->add_option("--level", sim.level, "Severity 0-5")->capture_default_str()->check(CLI::Range(0, 5));
  s->add_flag("--grid", sim.grid, "Run every kind and level and write grid.csv");
  s->add_flag("--write-corpus", sim.write_corpus, "Also write the corpus as KITTI labels");
  s->add_flag("--dump-config", sim.dump_config, "Also write the effective detector configs as JSON");
  s->add_option("--rgb-config", sim.rgb_config, "JSON overrides for the RGB detector")->check(CLI::ExistingFile);
  s->add_option("--depth-config", sim.depth_config, "JSON overrides for the depth detector")->check(CLI::ExistingFile);
  s->add_option("--seed", sim.seed, "Detector seed (falls back to FUSELAGE_SEED, then the built-in seeds)");
  s->add_option("--iou-gate", sim.iou_gate, "Matching IoU")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  s->add_flag("--svg", sim.svg, "Render grid plots as SVG");
  s->add_flag("--lenient", sim.lenient, "Skip malformed label lines with a warning");
  sim.fusion.add(s);

  CalibrateArgs cal;
  auto* k = app.add_subcommand("calibrate", "Calibration curve, ECE and IoU/variance/score scatter");
  k->add_option("--detections", cal.detections, "Detection file")->required()->check(CLI::ExistingFile);
  k->add_option("--labels", cal.labels, "Directory of KITTI label files")->required()->check(CLI::ExistingDirectory);
  k->add_option("--out", cal.out, "Output directory")->required();
  k->add_option("--iou-gate", cal.iou_gate, "Matching IoU")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  k->add_flag("--svg", cal.svg, "Render plots as SVG");
  k->add_flag("--lenient", cal.lenient, "Skip malformed label lines with a warning");

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "project") {
      project.threads = threads;
      return cmd_project(project);
    }
    if (name == "corrupt") {
      corrupt_args.threads = threads;
      return cmd_corrupt(corrupt_args);
    }
    if (name == "fuse") {
      fuse.threads = threads;
      return cmd_fuse(fuse);
    }
    if (name == "eval") {
      eval.threads = threads;
      return cmd_eval(eval);
    }
    if (name == "simulate") {
      sim.threads = threads;
      return cmd_simulate(sim);
    }
    cal.threads = threads;
    return cmd_calibrate(cal);
  } catch (const std::exception& ex) {
    std::cerr << "fuselage " << name << ": error: " << ex.what() << "\n";
    return 1;
  }
}
