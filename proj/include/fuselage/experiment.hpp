#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuselage/corruption.hpp"
#include "fuselage/eval.hpp"
#include "fuselage/fusion_nms.hpp"
#include "fuselage/simulator.hpp"

namespace fuselage {

// nr = noisy RGB, nd = noisy depth, avg-* = AvgFusion baseline.
enum class Scenario { kRgb, kDepth, kNrD, kRNd, kNrNd, kAvgNrD, kAvgRNd, kAvgNrNd };

inline constexpr std::array<Scenario, 8> kAllScenarios = {
    Scenario::kRgb,  Scenario::kDepth,    Scenario::kNrD,    Scenario::kRNd,
    Scenario::kNrNd, Scenario::kAvgNrD, Scenario::kAvgRNd, Scenario::kAvgNrNd};

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);  // ConfigError when unknown

// One condition of the grid. The clean condition is reported with noise
// kind "none" and level 0.
struct Condition {
  std::optional<CorruptionKind> kind;
  int level = 0;

  std::string kind_name() const;
  CorruptionSpec spec() const;
};

struct GridOptions {
  FusionConfig fusion = FusionConfig::experiment();
  double iou_gate = 0.5;
  std::vector<CorruptionKind> kinds{kAllCorruptions.begin(), kAllCorruptions.end()};
  int max_level = kMaxSeverity;
  bool include_clean = true;
  std::uint64_t avg_seed = 0xa5a5f00d;
  unsigned threads = 0;
};

struct GridCell {
  Scenario scenario = Scenario::kRgb;
  Condition condition;
  EvalReport report;
};

struct DegradationGrid {
  std::vector<GridCell> cells;  // conditions in order, scenarios in kAllScenarios order

  // nullptr when absent. Level 0 addresses the clean condition.
  const GridCell* find(Scenario s, std::optional<CorruptionKind> kind, int level) const;
  double mAP(Scenario s, std::optional<CorruptionKind> kind, int level) const;  // RangeError if absent
};

std::vector<Condition> grid_conditions(const GridOptions& opts);

// Single-modal pipeline: per-class NMS over one detector's raw boxes.
DetectionSet single_modal(const DetectionSet& raw, const FusionConfig& cfg);

// Baseline: keep a seeded random half (rounded up) of each modality's boxes,
// then run one joint per-class NMS. `frame_id` decorrelates frames.
DetectionSet avg_fusion(const DetectionSet& rgb, const DetectionSet& depth,
                        const FusionConfig& cfg, std::uint64_t seed, std::string_view frame_id);

// Every scenario for one condition, in kAllScenarios order. The corpus is
// assumed valid.
std::array<GridCell, kAllScenarios.size()> evaluate_condition(
    std::span<const GroundTruthFrame> corpus, const SimDetectorSpec& rgb,
    const SimDetectorSpec& depth, const Condition& cond, const GridOptions& opts);

DegradationGrid run_degradation_grid(std::span<const GroundTruthFrame> corpus,
                                     const SimDetectorSpec& rgb, const SimDetectorSpec& depth,
                                     const GridOptions& opts = {});

// Columns: scenario,noise_kind,level,class,AP,mAP,TP,FP,FN. One row per
// class plus an "all" row carrying the summed counts. A class without ground
// truth has an empty AP field.
void write_grid_csv(std::ostream& out, const DegradationGrid& grid);
inline constexpr std::string_view kReportCsvHeader = "scenario,noise_kind,level,class,AP,mAP,TP,FP,FN";
void write_report_rows(std::ostream& out, std::string_view scenario, std::string_view noise_kind,
                       int level, const EvalReport& report);
std::string format_grid_csv(const DegradationGrid& grid);

}  // namespace fuselage
