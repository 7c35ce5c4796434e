#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "firmscape/runner.hpp"

using namespace firmscape;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small quiet scenario: no demographic change, no relocation.
ScenarioConfig quiet_config(const std::string& out_dir) {
  ScenarioConfig cfg = scenario_from_json(preset_json("paper-2008"));
  cfg.grid = GridGeometry{12, 10, 1.0};
  cfg.start_year = 1950;
  cfg.end_year = 1951;
  cfg.out_dir = out_dir;
  cfg.relocation = RelocationParams{1.0, 0.0, 0.0};
  for (auto& p : cfg.sectors) {
    p.epsilon = 0.0;
    p.theta = 0.0;
    p.sigma_phi = 0.0;
    p.sigma_rho = 0.0;
    p.spin_rate = 0.0;
  }
  std::vector<Firm> firms;
  for (std::uint64_t id = 1; id <= 40; ++id) {
    Firm f;
    f.id = id;
    f.sector = SectorId{int(id % kSectorCount) + 1};
    f.size = 2.0 + double(id % 5);
    f.cell = CellId{std::int32_t(id % 12), std::int32_t((id / 12) % 10)};
    f.born_year = 1950;
    firms.push_back(f);
  }
  cfg.input = InMemoryInput{firms};
  return cfg;
}

}  // namespace

TEST_CASE("null dynamics copy the input to the output") {
  TempDir dir("firmscape_runner_null");
  ScenarioConfig cfg = quiet_config((dir.path / "out").string());
  const auto before = std::get<InMemoryInput>(cfg.input).firms;
  run(cfg);

  std::ifstream in(dir.path / "out" / "snapshot_1951_firms.csv");
  REQUIRE(in.good());
  const auto loaded = read_snapshot_firms(in);
  CHECK(loaded.year == 1951);
  REQUIRE(loaded.firms.size() == before.size());
  const WorldState original = build_world(before, cfg.grid, 1950);
  for (const Firm& f : loaded.firms) {
    const Firm* orig = original.find_firm(f.id);
    REQUIRE(orig != nullptr);
    CHECK(orig->sector == f.sector);
    CHECK(orig->size == f.size);
    CHECK(orig->cell == f.cell);
  }
}

TEST_CASE("one transition is logged per simulated year") {
  TempDir dir("firmscape_runner_years");
  ScenarioConfig cfg = quiet_config((dir.path / "out").string());
  cfg.end_year = 2004;  // 1950 -> 2004
  const RunReport report = run(cfg);
  CHECK(report.events.size() == 54);
  CHECK(report.timings.size() == 54);
  // aggregates: 21 rows per year including the initial one
  CHECK(report.aggregates.size() == 55u * kSectorCount);
  for (const auto& e : report.events) CHECK(e.firm_identity);
}

TEST_CASE("same seed gives byte-identical snapshots, new seed differs") {
  TempDir dir("firmscape_runner_det");
  ScenarioConfig cfg = scenario_from_json(preset_json("paper-2008"));
  cfg.grid = GridGeometry{25, 20, 1.0};
  cfg.start_year = 1950;
  cfg.end_year = 1960;
  cfg.snapshot_every = 5;
  cfg.potential.radius = 8.0;
  auto& synth = std::get<SyntheticInput>(cfg.input);
  nlohmann::json spec_json = {{"total_firms", 800}};
  synth.spec = detail::synthetic_from_json(spec_json);
  cfg.seed = 4242;

  cfg.out_dir = (dir.path / "a").string();
  run(cfg);
  cfg.out_dir = (dir.path / "b").string();
  run(cfg);
  cfg.seed = 4243;
  cfg.out_dir = (dir.path / "c").string();
  run(cfg);

  for (const std::string name :
       {"snapshot_1950_firms.csv", "snapshot_1955_firms.csv", "snapshot_1960_firms.csv",
        "snapshot_1960_raster.csv", "report.csv", "events.csv"}) {
    CHECK(slurp((dir.path / "a" / name).string()) == slurp((dir.path / "b" / name).string()));
  }
  CHECK(slurp((dir.path / "a" / "snapshot_1960_firms.csv").string()) !=
        slurp((dir.path / "c" / "snapshot_1960_firms.csv").string()));
}

TEST_CASE("bookkeeping identities hold in a live run") {
  TempDir dir("firmscape_runner_identity");
  ScenarioConfig cfg = scenario_from_json(preset_json("paper-2008"));
  cfg.grid = GridGeometry{20, 20, 1.0};
  cfg.start_year = 1950;
  cfg.end_year = 1975;
  cfg.out_dir = (dir.path / "out").string();
  cfg.potential.radius = 6.0;
  nlohmann::json spec_json = {{"total_firms", 600}};
  std::get<SyntheticInput>(cfg.input).spec = detail::synthetic_from_json(spec_json);

  const RunReport report = run(cfg);
  for (const auto& e : report.events) {
    CHECK(e.firm_identity);
    const double scale = std::max(1.0, std::abs(e.employees_after));
    CHECK(std::abs(e.employee_residual) <= 1e-9 * scale);
  }
  // Firm counts chain across transitions: after(t) == before(t+1).
  for (std::size_t i = 1; i < report.events.size(); ++i)
    CHECK(report.events[i].firms_before == report.events[i - 1].firms_after);
}

TEST_CASE("expectation mode tracks the mean-field trajectory") {
  TempDir dir("firmscape_runner_expectation");
  ScenarioConfig cfg = quiet_config((dir.path / "out").string());
  cfg.end_year = 1980;
  cfg.demography_mode = DemographyMode::Expectation;
  for (auto& p : cfg.sectors) {
    p.epsilon = 0.01;
    p.theta = 0.005;
    p.spin_rate = 0.015;
  }
  // A single well-populated sector keeps the oracle simple.
  std::vector<Firm> firms;
  for (std::uint64_t id = 1; id <= 1000; ++id) {
    Firm f;
    f.id = id;
    f.sector = SectorId{9};
    f.size = 4.0 + double(id % 7);
    f.cell = CellId{std::int32_t(id % 12), std::int32_t((id / 12) % 10)};
    f.born_year = 1950;
    firms.push_back(f);
  }
  double employees_t0 = 0.0;
  for (const Firm& f : firms) employees_t0 += f.size;
  cfg.input = InMemoryInput{firms};

  const RunReport report = run(cfg);
  const auto [firms_expected, employees_expected] =
      expected_totals(cfg.sectors[8], 1000.0, employees_t0, 30);

  std::int64_t firms_final = 0;
  double employees_final = 0.0;
  for (const auto& row : report.aggregates) {
    if (row.year == 1980 && row.sector.value == 9) {
      firms_final = row.firms;
      employees_final = row.employees;
    }
  }
  // The integer population stays within one rounded event of each kind of
  // the continuous trajectory.
  CHECK(std::abs(double(firms_final) - firms_expected) <= 2.0);
  CHECK(std::abs(employees_final - employees_expected) <= 0.01 * employees_expected);
}

TEST_CASE("run rejects invalid configs before any work") {
  ScenarioConfig cfg = quiet_config("unused");
  cfg.end_year = cfg.start_year;
  CHECK_THROWS_AS(run(cfg), ValidationError);
}
