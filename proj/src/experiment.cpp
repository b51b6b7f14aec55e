#include "fuselage/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fuselage/error.hpp"
#include "fuselage/parallel.hpp"
#include "fuselage/philox.hpp"

namespace fuselage {

namespace {

constexpr std::uint32_t kDropLane = 0x64726f70u;  // "drop"

constexpr std::array<std::string_view, 8> kScenarioNames = {
    "rgb", "depth", "nr-d", "r-nd", "nr-nd", "avg-nr-d", "avg-r-nd", "avg-nr-nd"};

// Indices of the ceil(n/2) boxes with the smallest random keys, in input order.
std::vector<std::size_t> keep_half(std::size_t n, std::uint64_t seed, std::uint32_t frame,
                                   std::uint32_t modality) {
  std::vector<std::pair<double, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = RandomBlock::at(seed, {frame, static_cast<std::uint32_t>(i), modality, kDropLane});
    keyed[i] = {u.uniform[0], i};
  }
  const std::size_t keep = (n + 1) / 2;
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(keep), keyed.end());
  std::vector<std::size_t> idx(keep);
  for (std::size_t i = 0; i < keep; ++i) idx[i] = keyed[i].second;
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string_view scenario_name(Scenario s) { return kScenarioNames[static_cast<std::size_t>(s)]; }

Scenario parse_scenario(std::string_view name) {
  for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
    if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::string Condition::kind_name() const {
  return kind ? std::string(corruption_name(*kind)) : std::string("none");
}

CorruptionSpec Condition::spec() const {
  CorruptionSpec s;
  s.kind = kind.value_or(CorruptionKind::kGaussianNoise);
  s.level = kind ? level : 0;
  return s;
}

const GridCell* DegradationGrid::find(Scenario s, std::optional<CorruptionKind> kind,
                                      int level) const {
  for (const auto& c : cells) {
    if (c.scenario != s) continue;
    if (level == 0 ? c.condition.level == 0
                   : (c.condition.level == level && c.condition.kind == kind)) {
      return &c;
    }
  }
  return nullptr;
}

double DegradationGrid::mAP(Scenario s, std::optional<CorruptionKind> kind, int level) const {
  const GridCell* c = find(s, kind, level);
  if (!c) {
    throw RangeError("grid has no cell " + std::string(scenario_name(s)) + "/" +
                     Condition{kind, level}.kind_name() + "/" + std::to_string(level));
  }
  return c->report.mAP;
}

std::vector<Condition> grid_conditions(const GridOptions& opts) {
  if (opts.max_level < 0 || opts.max_level > kMaxSeverity) {
    throw ConfigError("max_level must lie in [0, 5]");
  }
  std::vector<Condition> out;
  if (opts.include_clean) out.push_back({std::nullopt, 0});
  for (CorruptionKind k : opts.kinds) {
    for (int level = 1; level <= opts.max_level; ++level) out.push_back({k, level});
  }
  return out;
}

DetectionSet single_modal(const DetectionSet& raw, const FusionConfig& cfg) {
  return standard_nms(raw, cfg.single_modal_nms_iou, cfg.per_class);
}

DetectionSet avg_fusion(const DetectionSet& rgb, const DetectionSet& depth,
                        const FusionConfig& cfg, std::uint64_t seed, std::string_view frame_id) {
  const std::uint32_t frame = fnv1a32(frame_id);
  DetectionSet joint;
  for (std::size_t i : keep_half(rgb.size(), seed, frame, 0)) joint.push_back(rgb[i]);
  for (std::size_t i : keep_half(depth.size(), seed, frame, 1)) joint.push_back(depth[i]);
  return standard_nms(joint, cfg.single_modal_nms_iou, cfg.per_class);
}

std::array<GridCell, kAllScenarios.size()> evaluate_condition(
    std::span<const GroundTruthFrame> corpus, const SimDetectorSpec& rgb,
    const SimDetectorSpec& depth, const Condition& cond, const GridOptions& opts) {
  constexpr std::size_t kS = kAllScenarios.size();
  const CorruptionSpec clean{};
  const CorruptionSpec spec = cond.spec();
  std::array<std::vector<FrameEvaluation>, kS> evals;
  for (auto& e : evals) e.reserve(corpus.size());
  for (const auto& gt : corpus) {
    const DetectionSet r = simulate_detections(gt, rgb, clean);
    const DetectionSet d = simulate_detections(gt, depth, clean);
    const DetectionSet nr = spec.level == 0 ? r : simulate_detections(gt, rgb, spec);
    const DetectionSet nd = spec.level == 0 ? d : simulate_detections(gt, depth, spec);
    const auto eval = [&](Scenario s, const DetectionSet& dets) {
      evals[static_cast<std::size_t>(s)].push_back(evaluate_frame(dets.boxes(), gt, opts.iou_gate));
    };
    eval(Scenario::kRgb, single_modal(nr, opts.fusion));
    eval(Scenario::kDepth, single_modal(nd, opts.fusion));
    eval(Scenario::kNrD, multi_source_nms(nr, d, opts.fusion));
    eval(Scenario::kRNd, multi_source_nms(r, nd, opts.fusion));
    eval(Scenario::kNrNd, multi_source_nms(nr, nd, opts.fusion));
    eval(Scenario::kAvgNrD, avg_fusion(nr, d, opts.fusion, opts.avg_seed, gt.frame_id));
    eval(Scenario::kAvgRNd, avg_fusion(r, nd, opts.fusion, opts.avg_seed, gt.frame_id));
    eval(Scenario::kAvgNrNd, avg_fusion(nr, nd, opts.fusion, opts.avg_seed, gt.frame_id));
  }
  std::array<GridCell, kS> cells;
  for (std::size_t s = 0; s < kS; ++s) cells[s] = {kAllScenarios[s], cond, summarize(evals[s])};
  return cells;
}

DegradationGrid run_degradation_grid(std::span<const GroundTruthFrame> corpus,
                                     const SimDetectorSpec& rgb, const SimDetectorSpec& depth,
                                     const GridOptions& opts) {
  if (corpus.empty()) throw InsufficientDataError("degradation grid needs a non-empty corpus");
  validate(opts.fusion);
  validate(rgb);
  validate(depth);
  for (const auto& f : corpus) validate(f);
  const auto conditions = grid_conditions(opts);

  constexpr std::size_t kS = kAllScenarios.size();
  std::vector<GridCell> cells(conditions.size() * kS);
  parallel_for(conditions.size(), opts.threads, [&](std::size_t ci) {
    const auto part = evaluate_condition(corpus, rgb, depth, conditions[ci], opts);
    std::copy(part.begin(), part.end(), cells.begin() + static_cast<std::ptrdiff_t>(ci * kS));
  });
  return {std::move(cells)};
}

void write_report_rows(std::ostream& out, std::string_view scenario, std::string_view noise_kind,
                       int level, const EvalReport& report) {
  const std::string prefix = std::string(scenario) + "," + std::string(noise_kind) + "," +
                             std::to_string(level) + ",";
  const std::string map = fixed6(report.mAP);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& cr = report.classes[static_cast<std::size_t>(c)];
    tp += cr.tp;
    fp += cr.fp;
    fn += cr.fn;
    out << prefix << class_name(c) << "," << (cr.ap ? fixed6(*cr.ap) : std::string()) << ","
        << map << "," << cr.tp << "," << cr.fp << "," << cr.fn << "\n";
  }
  out << prefix << "all," << map << "," << map << "," << tp << "," << fp << "," << fn << "\n";
}

void write_grid_csv(std::ostream& out, const DegradationGrid& grid) {
  out << kReportCsvHeader << "\n";
  for (const auto& cell : grid.cells) {
    write_report_rows(out, scenario_name(cell.scenario), cell.condition.kind_name(),
                      cell.condition.level, cell.report);
  }
}

std::string format_grid_csv(const DegradationGrid& grid) {
  std::ostringstream os;
  write_grid_csv(os, grid);
  return os.str();
}

}  // namespace fuselage
