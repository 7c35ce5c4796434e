#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "firmscape/scenario.hpp"

using namespace firmscape;

TEST_CASE("preset carries the calibrated parameter tables") {
  const ScenarioConfig cfg = scenario_from_json(preset_json("paper-2008"));
  CHECK(cfg.start_year == 1950);
  CHECK(cfg.end_year == 2004);
  CHECK(cfg.grid.ncols == 125);
  CHECK(cfg.grid.nrows == 106);

  CHECK(cfg.sectors[14].epsilon == 0.03137);   // wholesale growth
  CHECK(cfg.sectors[5].epsilon == -0.01779);   // clothing decline
  CHECK(cfg.sectors[7].theta == 0.02);         // mining closure rate
  CHECK(cfg.sectors[15].s_crit == 3303.0);     // air transport critical size
  CHECK(cfg.sectors[18].spin_alpha == 0.1);    // transport services
  CHECK(cfg.sectors[8].decay_mp == 0.1);       // manufacturing reach
  CHECK(cfg.sectors[14].decay_ap == 0.2);      // wholesale
  CHECK(cfg.sectors[13].decay_cp == 0.3);      // retail
  CHECK(cfg.sectors[2].decay_mp == 0.4);       // construction
  CHECK(cfg.sectors[5].decay_mp == 0.5);       // clothing
  CHECK(cfg.sectors[0].decay_mp == 0.6);       // default reach
  for (const auto& p : cfg.sectors) {
    CHECK(p.w_mp == 1.0);
    CHECK(p.w_ap == 0.5);
    CHECK(p.w_cp == -1.0);
  }
  CHECK(cfg.relocation.lambda_stay == 0.9);
  CHECK(cfg.relocation.lambda_occupied == 0.09);
  CHECK(cfg.relocation.lambda_unoccupied == 0.01);
  CHECK(cfg.rng_algorithm == "philox4x32-10");
  CHECK(std::holds_alternative<SyntheticInput>(cfg.input));
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("preset apportions the synthetic registry by sector share") {
  const ScenarioConfig cfg = scenario_from_json(preset_json("paper-2008"));
  const auto& spec = std::get<SyntheticInput>(cfg.input).spec;
  std::int64_t total = 0;
  for (const auto& s : spec.sectors) total += s.count;
  CHECK(total == 10000);
  // Retail holds roughly 130285/406444 of firms.
  CHECK(std::abs(double(spec.sectors[13].count) - 10000.0 * 130285.0 / 406444.0) <= 1.0);
  CHECK(spec.sectors[15].mean_size == doctest::Approx(3303.0));
}

TEST_CASE("unknown preset and unknown keys are rejected") {
  CHECK_THROWS_AS(preset_json("paper-2009"), ValidationError);
  auto j = preset_json("paper-2008");
  j["grid"]["cellsize"] = 2.0;  // typo
  CHECK_THROWS_WITH_AS(scenario_from_json(j), doctest::Contains("unknown key 'cellsize'"),
                       ValidationError);
}

TEST_CASE("config merge overrides preset values") {
  auto base = preset_json("paper-2008");
  nlohmann::json user;
  user["seed"] = 99;
  user["grid"] = {{"ncols", 40}, {"nrows", 30}};
  user["potential"] = {{"radius", "inf"}};
  user["sector_overrides"] = nlohmann::json::array({{{"id", 3}, {"epsilon", 0.5}}});
  base.merge_patch(user);
  const ScenarioConfig cfg = scenario_from_json(base);
  CHECK(cfg.seed == 99);
  CHECK(cfg.grid.ncols == 40);
  CHECK(cfg.grid.nrows == 30);
  CHECK(cfg.grid.cell_size == 1.0);  // untouched by the patch
  CHECK(std::isinf(cfg.potential.radius));
  CHECK(cfg.sectors[2].epsilon == 0.5);
  CHECK(cfg.sectors[2].theta == 0.009);  // other fields keep preset values
}

TEST_CASE("event order parsing") {
  auto j = preset_json("paper-2008");
  j["event_order"] = "relocation,closure,growth,spinoff";
  const ScenarioConfig cfg = scenario_from_json(j);
  CHECK(cfg.relocation_first);
  CHECK(cfg.demographic_order[0] == DemographicEvent::Closure);
  CHECK(cfg.demographic_order[1] == DemographicEvent::Growth);
  CHECK(cfg.demographic_order[2] == DemographicEvent::Spinoff);

  j["event_order"] = "growth,relocation,closure,spinoff";
  CHECK_THROWS_WITH_AS(scenario_from_json(j), doctest::Contains("first or last"),
                       ValidationError);
  j["event_order"] = "growth,growth,closure,relocation";
  CHECK_THROWS_AS(scenario_from_json(j).validate(), ValidationError);
}

TEST_CASE("validation catches bad configs") {
  SUBCASE("years") {
    auto j = preset_json("paper-2008");
    j["end_year"] = 1950;
    CHECK_THROWS_WITH_AS(scenario_from_json(j).validate(),
                         doctest::Contains("start_year must precede"), ValidationError);
  }
  SUBCASE("relocation probabilities") {
    auto j = preset_json("paper-2008");
    j["relocation"]["lambda_stay"] = 0.8;
    CHECK_THROWS_WITH_AS(scenario_from_json(j).validate(), doctest::Contains("sum to 1"),
                         ValidationError);
  }
  SUBCASE("rng pin") {
    auto j = preset_json("paper-2008");
    j["rng"] = "mt19937";
    CHECK_THROWS_WITH_AS(scenario_from_json(j).validate(),
                         doctest::Contains("unsupported rng"), ValidationError);
  }
  SUBCASE("missing input files") {
    auto j = preset_json("paper-2008");
    j["input"] = {{"registry", "/nonexistent/registry.csv"},
                  {"municipalities", "/nonexistent/map.csv"}};
    CHECK_THROWS_WITH_AS(scenario_from_json(j).validate(), doctest::Contains("not found"),
                         ValidationError);
  }
  SUBCASE("positive delta rejected") {
    auto j = preset_json("paper-2008");
    j["sector_overrides"] = nlohmann::json::array({{{"id", 1}, {"delta", 0.5}}});
    CHECK_THROWS_WITH_AS(scenario_from_json(j).validate(), doctest::Contains("delta"),
                         ValidationError);
  }
}

TEST_CASE("load_scenario applies file and command-line overrides") {
  const auto dir = std::filesystem::temp_directory_path() / "firmscape_scenario_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "config.json").string();
  {
    std::ofstream out(path);
    out << R"({"start_year": 1960, "end_year": 1970})";
  }
  const ScenarioConfig cfg = load_scenario("paper-2008", path, 777, std::string("results"));
  CHECK(cfg.start_year == 1960);
  CHECK(cfg.end_year == 1970);
  CHECK(cfg.seed == 777);
  CHECK(cfg.out_dir == "results");
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(load_scenario("paper-2008", std::string("/nonexistent.json"), {}, {}),
                  ValidationError);
}
