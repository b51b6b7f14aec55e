#include <doctest.h>

#include <cmath>
#include <limits>

#include "fuselage/plot.hpp"

using namespace fuselage;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("plot") {
  TEST_CASE("line plot structure") {
    const std::vector<Series> s{{"rgb", {{1, 0.8}, {2, 0.7}, {3, 0.5}}},
                                {"depth", {{1, 0.9}, {2, 0.85}, {3, 0.8}}}};
    const std::string svg = svg_line_plot({"mAP <noise>", "level", "mAP"}, s);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find("mAP &lt;noise&gt;") != std::string::npos);
    CHECK(svg.find(">depth<") != std::string::npos);
    CHECK(svg_line_plot({"mAP <noise>", "level", "mAP"}, s) == svg);
  }

  TEST_CASE("scatter skips non-finite points") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<Series> s{{"pts", {{0.1, 2}, {nan, 3}, {0.5, std::numeric_limits<double>::infinity()}, {0.9, 1}}}};
    const std::string svg = svg_scatter_plot({"t", "x", "y"}, s);
    CHECK(count(svg, "r=\"1.8\"") == 2);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("inf") == std::string::npos);
  }

  TEST_CASE("degenerate inputs still render") {
    const std::vector<Series> one{{"p", {{1, 1}}}};
    CHECK(svg_scatter_plot({}, one).find("</svg>") != std::string::npos);
    CHECK(svg_line_plot({}, {}).find("</svg>") != std::string::npos);
  }
}
