#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "firmscape/analysis.hpp"

using namespace firmscape;

TEST_CASE("rank-size metrics") {
  SUBCASE("single occupied cell concentrates everything") {
    const auto m = rank_size_metrics({42});
    CHECK(m.occupied_cells == 1);
    CHECK(m.total_firms == 42);
    CHECK(m.top_decile_share == 1.0);
    CHECK(!m.slope_defined);
  }

  SUBCASE("empty input") {
    const auto m = rank_size_metrics({});
    CHECK(m.occupied_cells == 0);
    CHECK(m.total_firms == 0);
  }

  SUBCASE("ideal harmonic counts fit slope -1") {
    // counts k, k/2, k/3, ... lie exactly on ln c = ln k - 1 * ln r.
    std::vector<std::int64_t> counts;
    const std::int64_t k = 720720;  // divisible by 1..16
    for (int r = 1; r <= 16; ++r) counts.push_back(k / r);
    const auto m = rank_size_metrics(counts);
    REQUIRE(m.slope_defined);
    CHECK(m.zipf_slope == doctest::Approx(-1.0).epsilon(0.01));
  }

  SUBCASE("uniform counts fit slope 0") {
    const auto m = rank_size_metrics(std::vector<std::int64_t>(50, 7));
    REQUIRE(m.slope_defined);
    CHECK(m.zipf_slope == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.top_decile_share == doctest::Approx(5.0 / 50.0).epsilon(1e-12));
  }

  SUBCASE("zero counts are ignored") {
    const auto m = rank_size_metrics({0, 5, 0, 3});
    CHECK(m.occupied_cells == 2);
    CHECK(m.total_firms == 8);
  }
}

TEST_CASE("raster analysis splits by sector and includes the combined row") {
  std::vector<RasterRow> rows{
      {CellId{0, 0}, SectorId{1}, 10},
      {CellId{1, 0}, SectorId{1}, 5},
      {CellId{0, 0}, SectorId{2}, 3},
  };
  const auto analyses = analyze_raster(rows);
  REQUIRE(analyses.size() == kSectorCount + 1);
  CHECK(analyses[0].sector.value == 0);  // combined
  CHECK(analyses[0].metrics.total_firms == 18);
  CHECK(analyses[1].sector.value == 1);
  CHECK(analyses[1].metrics.total_firms == 15);
  CHECK(analyses[1].metrics.occupied_cells == 2);
  CHECK(analyses[2].metrics.total_firms == 3);
  CHECK(analyses[3].metrics.total_firms == 0);
}

TEST_CASE("raster diff reports nonzero cell deltas") {
  std::vector<RasterRow> a{
      {CellId{0, 0}, SectorId{1}, 10},
      {CellId{1, 1}, SectorId{2}, 4},
  };
  std::vector<RasterRow> b{
      {CellId{0, 0}, SectorId{1}, 10},  // unchanged -> omitted
      {CellId{1, 1}, SectorId{2}, 6},
      {CellId{2, 2}, SectorId{3}, 1},
  };
  const auto diff = raster_diff(a, b);
  REQUIRE(diff.size() == 2);
  CHECK(diff[0].cell == CellId{1, 1});
  CHECK(diff[0].count == 2);
  CHECK(diff[1].cell == CellId{2, 2});
  CHECK(diff[1].count == 1);

  const auto reverse = raster_diff(b, a);
  CHECK(reverse[0].count == -2);
}

TEST_CASE("rank-size table lists counts in descending rank order") {
  std::vector<RasterRow> rows{
      {CellId{0, 0}, SectorId{4}, 3},
      {CellId{1, 0}, SectorId{4}, 9},
      {CellId{2, 0}, SectorId{4}, 6},
  };
  std::ostringstream out;
  write_rank_size_table(out, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "sector,rank,count");
  std::vector<std::string> body;
  while (std::getline(in, line)) body.push_back(line);
  // Combined (sector 0) and sector 4 each list three ranks.
  REQUIRE(body.size() == 6);
  CHECK(body[0] == "0,1,9");
  CHECK(body[1] == "0,2,6");
  CHECK(body[2] == "0,3,3");
  CHECK(body[3] == "4,1,9");
  CHECK(body[5] == "4,3,3");
}

TEST_CASE("analysis CSV output shape") {
  std::vector<RasterRow> rows{{CellId{0, 0}, SectorId{1}, 2}};
  std::ostringstream out;
  write_analysis(out, analyze_raster(rows));
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == kSectorCount + 2);  // header + combined + 21 sectors
}
