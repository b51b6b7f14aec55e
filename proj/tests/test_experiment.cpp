#include <doctest.h>

#include <sstream>

#include "fuselage/error.hpp"
#include "fuselage/experiment.hpp"
#include "support.hpp"

using namespace fuselage;

TEST_SUITE("experiment") {
  TEST_CASE("avg fusion keeps half of each modality") {
    std::mt19937_64 rng(61);
    FusionConfig cfg = FusionConfig::experiment();
    for (int t = 0; t < 200; ++t) {
      DetectionSet r, d;
      const std::size_t nr = rng() % 9, nd = rng() % 9;
      // Far apart so NMS keeps every survivor.
      for (std::size_t i = 0; i < nr; ++i) r.push_back(test::make_box(100.0 * i, 0, 10, 10, 1, 0.5));
      for (std::size_t i = 0; i < nd; ++i)
        d.push_back(test::make_box(100.0 * i, 500, 10, 10, 1, 0.5, Modality::kDepth));
      const auto out = avg_fusion(r, d, cfg, 7, "000001");
      std::size_t kr = 0, kd = 0;
      for (const auto& b : out.boxes()) (b.modality == Modality::kRgb ? kr : kd) += 1;
      CHECK(kr == (nr + 1) / 2);
      CHECK(kd == (nd + 1) / 2);
      CHECK(avg_fusion(r, d, cfg, 7, "000001") == out);
    }
  }

  TEST_CASE("grid conditions") {
    GridOptions o;
    const auto c = grid_conditions(o);
    REQUIRE(c.size() == 16);
    CHECK(c[0].kind_name() == "none");
    CHECK(c[0].level == 0);
    CHECK(c[1].kind == CorruptionKind::kGaussianNoise);
    CHECK(c[15].level == 5);
    o.max_level = 6;
    CHECK_THROWS_AS(grid_conditions(o), ConfigError);
    CHECK(parse_scenario("avg-nr-nd") == Scenario::kAvgNrNd);
    CHECK_THROWS_AS(parse_scenario("fused"), ConfigError);
  }

  TEST_CASE("grid is independent of thread count") {
    const auto corpus = generate_corpus(60, 77);
    GridOptions o;
    o.max_level = 2;
    o.threads = 1;
    const auto a = format_grid_csv(run_degradation_grid(corpus, SimDetectorSpec::rgb_default(),
                                                        SimDetectorSpec::depth_default(), o));
    o.threads = 4;
    const auto b = format_grid_csv(run_degradation_grid(corpus, SimDetectorSpec::rgb_default(),
                                                        SimDetectorSpec::depth_default(), o));
    CHECK(a == b);
  }

  TEST_CASE("clean ordering on the golden corpus") {
    const auto corpus = generate_corpus(500, 0xC0FFEE);
    GridOptions o;
    o.kinds.clear();
    const auto g = run_degradation_grid(corpus, SimDetectorSpec::rgb_default(),
                                        SimDetectorSpec::depth_default(), o);
    REQUIRE(g.cells.size() == kAllScenarios.size());
    const double rgb = g.mAP(Scenario::kRgb, std::nullopt, 0);
    const double depth = g.mAP(Scenario::kDepth, std::nullopt, 0);
    const double fused = g.mAP(Scenario::kNrNd, std::nullopt, 0);
    CHECK(depth > rgb);
    CHECK(fused > rgb);
    CHECK(std::abs(fused - depth) < 0.02);
    CHECK_THROWS_AS(g.mAP(Scenario::kRgb, CorruptionKind::kFrost, 3), RangeError);
  }

  TEST_CASE("csv layout") {
    const auto corpus = generate_corpus(10, 3);
    GridOptions o;
    o.kinds = {CorruptionKind::kMotionBlur};
    o.max_level = 1;
    const auto g = run_degradation_grid(corpus, SimDetectorSpec::rgb_default(),
                                        SimDetectorSpec::depth_default(), o);
    std::istringstream in(format_grid_csv(g));
    std::string line;
    std::getline(in, line);
    CHECK(line == kReportCsvHeader);
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    CHECK(rows.size() == 2 * 8 * 4);
    CHECK(rows[0].rfind("rgb,none,0,car,", 0) == 0);
    CHECK(rows[3].rfind("rgb,none,0,all,", 0) == 0);
    CHECK(rows[32].rfind("rgb,motion_blur,1,car,", 0) == 0);
    CHECK(rows.back().rfind("avg-nr-nd,motion_blur,1,all,", 0) == 0);
  }

  TEST_CASE("empty corpus") {
    CHECK_THROWS_AS(run_degradation_grid({}, SimDetectorSpec::rgb_default(),
                                         SimDetectorSpec::depth_default()),
                    InsufficientDataError);
  }
}
