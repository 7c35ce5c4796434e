#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "firmscape/demography.hpp"

using namespace firmscape;

namespace {

SectorParams quiet_params() {
  SectorParams p;
  p.epsilon = 0.0;
  p.theta = 0.0;
  p.sigma_phi = 0.0;
  p.sigma_rho = 0.0;
  p.spin_rate = 0.0;  // no spin-offs
  return p;
}

SectorParamsTable uniform_table(const SectorParams& p) {
  SectorParamsTable t;
  t.fill(p);
  return t;
}

WorldState world_of(std::int64_t n, double size, const GridGeometry& grid, int year) {
  std::vector<Firm> firms;
  for (std::int64_t i = 0; i < n; ++i) {
    Firm f;
    f.id = std::uint64_t(i + 1);
    f.sector = SectorId{int(i % kSectorCount) + 1};
    f.size = size;
    f.cell = CellId{std::int32_t(i) % grid.ncols, std::int32_t(i / grid.ncols) % grid.nrows};
    f.born_year = year;
    firms.push_back(f);
  }
  return build_world(firms, grid, year);
}

}  // namespace

TEST_CASE("growth follows the sector trend") {
  // Oracles: direct evaluation of size * (1 + epsilon + phi).
  CHECK(grow_firm_with_noise(17.0, 0.03137, 0.0) == doctest::Approx(17.53329).epsilon(1e-12));
  CHECK(grow_firm_with_noise(5.0, 0.0, 0.0) == 5.0);
  CHECK(grow_firm_with_noise(100.0, -0.01779, 0.0) == doctest::Approx(98.221).epsilon(1e-12));

  SectorParams p = quiet_params();
  p.epsilon = 0.03137;
  auto s = rng::substream(1, 0, 1, rng::Purpose::Growth);
  CHECK(grow_firm(17.0, p, s) == doctest::Approx(17.53329).epsilon(1e-12));
}

TEST_CASE("mean realized growth matches the trend under noise") {
  SectorParams p = quiet_params();
  p.epsilon = 0.02;
  p.sigma_phi = 0.05;
  const int n = 100000;
  double sum_rel = 0.0;
  for (int i = 0; i < n; ++i) {
    auto s = rng::substream(5, 2000, std::uint64_t(i), rng::Purpose::Growth);
    sum_rel += grow_firm(10.0, p, s) / 10.0 - 1.0;
  }
  const double band = 3.0 * p.sigma_phi / std::sqrt(double(n));
  CHECK(std::abs(sum_rel / n - p.epsilon) < band);
}

TEST_CASE("closure probability clamps to [0,1]") {
  CHECK(closure_probability_with_noise(0.02, 0.0) == 0.02);
  CHECK(closure_probability_with_noise(0.0, 0.0) == 0.0);
  CHECK(closure_probability_with_noise(0.0001, -0.1) == 0.0);
  CHECK(closure_probability_with_noise(0.95, 0.2) == 1.0);

  SectorParams p = quiet_params();
  p.theta = 0.02;
  auto s = rng::substream(1, 0, 1, rng::Purpose::Closure);
  CHECK(closure_probability(p, s) == 0.02);
}

TEST_CASE("spin-off probability is logistic in size") {
  SectorParams p = quiet_params();
  p.spin_rate.reset();
  p.spin_alpha = 0.1;
  p.spin_beta = 0.1;
  p.s_crit = 10.0;

  SUBCASE("midpoint is exactly one half") {
    // alpha * size == beta
    CHECK(spinoff_probability(1.0, p) == 0.5);
  }
  SUBCASE("direct evaluation at size 100") {
    const double expected = 1.0 / (1.0 + std::exp((0.1 * 100.0 - 0.1) / 10.0));
    CHECK(spinoff_probability(100.0, p) == expected);
    CHECK(expected == doctest::Approx(0.2709122).epsilon(1e-6));
  }
  SUBCASE("orientation flips the curve") {
    SectorParams q = p;
    q.spin_orientation = -1;
    const double plus = spinoff_probability(100.0, p);
    const double minus = spinoff_probability(100.0, q);
    CHECK(plus + minus == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(minus == doctest::Approx(0.7290878).epsilon(1e-6));
  }
  SUBCASE("strictly monotone in size") {
    double prev = spinoff_probability(0.5, p);
    for (double size = 1.0; size < 400.0; size += 7.3) {
      const double cur = spinoff_probability(size, p);
      CHECK(cur < prev);  // decreasing for orientation +1, alpha > 0
      prev = cur;
    }
  }
  SUBCASE("constant rate override") {
    SectorParams q = p;
    q.spin_rate = 0.07;
    CHECK(spinoff_probability(3.0, q) == 0.07);
    CHECK(spinoff_probability(300.0, q) == 0.07);
  }
}

TEST_CASE("spin-off split conserves employees bit-exactly") {
  SUBCASE("plain split") {
    const auto s = spinoff_split(10.0, 3.0);
    CHECK(s.parent_size == 7.0);
    CHECK(s.spinoff_size == 3.0);
    CHECK(s.parent_size + s.spinoff_size == 10.0);
  }
  SUBCASE("oversized draw clamps to parent-1") {
    const auto s = spinoff_split(10.0, 50.0);
    CHECK(s.spinoff_size == 9.0);
    CHECK(s.parent_size == 1.0);
  }
  SUBCASE("undersized draw clamps to 1") {
    const auto s = spinoff_split(10.0, 0.001);
    CHECK(s.spinoff_size == 1.0);
    CHECK(s.parent_size == 9.0);
  }
  SUBCASE("conservation holds for random real-valued sizes") {
    auto stream = rng::substream(21, 0, 0, rng::Purpose::General);
    for (int i = 0; i < 100000; ++i) {
      const double parent = 2.0 + 1000.0 * stream.uniform01();
      const double draw = std::exp(stream.normal(0.0, 2.0));
      const auto s = spinoff_split(parent, draw);
      CHECK(s.parent_size + s.spinoff_size == parent);
      CHECK(s.spinoff_size >= 1.0 - 1e-9);
      CHECK(s.parent_size > 0.0);
    }
  }
}

TEST_CASE("lognormal spin-off size has the right median") {
  SectorParams p = quiet_params();
  p.spin_mu = 0.0;
  p.spin_sigma = 1.0;
  std::vector<double> draws;
  const int n = 100000;
  draws.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto s = rng::substream(31, 0, std::uint64_t(i), rng::Purpose::SpinoffSize);
    draws.push_back(s.lognormal(p.spin_mu, p.spin_sigma));
  }
  std::nth_element(draws.begin(), draws.begin() + n / 2, draws.end());
  // Median of exp(N(0,1)) is exp(0) = 1; sample median of n draws has
  // sd ~ 1/(2 f(med) sqrt(n)) with f the lognormal density at the median.
  const double density_at_median = 1.0 / std::sqrt(2.0 * 3.14159265358979);
  const double band = 3.0 / (2.0 * density_at_median * std::sqrt(double(n)));
  CHECK(std::abs(draws[n / 2] - 1.0) < band);
}

TEST_CASE("execute_spinoff builds a child in the parent cell") {
  Firm parent;
  parent.id = 9;
  parent.sector = SectorId{4};
  parent.size = 12.0;
  parent.cell = CellId{3, 2};
  parent.born_year = 1960;

  SectorParams p = quiet_params();
  auto s = rng::substream(7, 1970, 9, rng::Purpose::SpinoffSize);
  const auto [parent_size, child] = execute_spinoff(parent, p, 100, 1971, s);
  CHECK(parent_size + child.size == 12.0);
  CHECK(child.sector == parent.sector);
  CHECK(child.cell == parent.cell);
  CHECK(child.id == 100);
  CHECK(child.born_year == 1971);
  CHECK(child.parent_id == 9);

  Firm small = parent;
  small.size = 1.5;
  auto s2 = rng::substream(7, 1970, 9, rng::Purpose::SpinoffSize);
  CHECK_THROWS_AS(execute_spinoff(small, p, 101, 1971, s2), ValidationError);
}

TEST_CASE("null dynamics leave the state unchanged") {
  WorldState state = world_of(50, 3.0, GridGeometry{10, 10, 1.0}, 1950);
  const auto occ_before = state.occupancy_raw();
  const auto outcome = step_demography(state, uniform_table(quiet_params()), {}, 99);
  CHECK(outcome.closed.empty());
  CHECK(outcome.spinoffs.empty());
  CHECK(state.firm_count() == 50);
  CHECK(state.occupancy_raw() == occ_before);
  for (const Firm& f : state.firms()) CHECK(f.size == 3.0);
  CHECK(outcome.firm_identity_holds());
  CHECK(outcome.employee_identity_residual() == 0.0);
}

TEST_CASE("survival over 54 years matches the binomial oracle") {
  SectorParams p = quiet_params();
  p.theta = 0.01;
  const SectorParamsTable table = uniform_table(p);

  const double survive_prob = std::pow(0.99, 54);
  const double mean = 1000.0 * survive_prob;
  const double sd = std::sqrt(1000.0 * survive_prob * (1.0 - survive_prob));

  for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
    WorldState state = world_of(1000, 5.0, GridGeometry{40, 25, 1.0}, 1950);
    for (int year = 0; year < 54; ++year) {
      step_demography(state, table, {}, seed);
      state.set_year(state.year() + 1);
    }
    CHECK(std::abs(double(state.firm_count()) - mean) < 3.0 * sd);
  }
}

TEST_CASE("bookkeeping identities hold for arbitrary seeds") {
  SectorParams p;
  p.epsilon = 0.01;
  p.theta = 0.05;
  p.sigma_phi = 0.05;
  p.sigma_rho = 0.01;
  p.spin_rate.reset();
  p.spin_alpha = 1.0;
  p.spin_beta = 5.0;
  p.s_crit = 5.0;
  const SectorParamsTable table = uniform_table(p);

  for (std::uint64_t seed : {1ull, 77ull, 123456789ull}) {
    WorldState state = world_of(400, 6.0, GridGeometry{20, 20, 1.0}, 2000);
    for (int year = 0; year < 10; ++year) {
      const auto outcome = step_demography(state, table, {}, seed);
      state.set_year(state.year() + 1);
      CHECK(outcome.firm_identity_holds());
      const double scale = std::max(1.0, std::abs(outcome.employees_after));
      CHECK(std::abs(outcome.employee_identity_residual()) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("closed firms do not spin off under the default order") {
  SectorParams p = quiet_params();
  p.theta = 1.0;       // every firm closes
  p.spin_rate = 1.0;   // and would always spin off if alive
  WorldState state = world_of(30, 10.0, GridGeometry{10, 10, 1.0}, 1990);
  const auto outcome = step_demography(state, uniform_table(p), {}, 3);
  CHECK(outcome.closed.size() == 30);
  CHECK(outcome.spinoffs.empty());
  CHECK(state.firm_count() == 0);
}

TEST_CASE("spin-off before closure is possible under a custom order") {
  SectorParams p = quiet_params();
  p.theta = 1.0;
  p.spin_rate = 1.0;
  DemographyOptions options;
  options.order = {DemographicEvent::Growth, DemographicEvent::Spinoff,
                   DemographicEvent::Closure};
  WorldState state = world_of(30, 10.0, GridGeometry{10, 10, 1.0}, 1990);
  const auto outcome = step_demography(state, uniform_table(p), options, 3);
  CHECK(outcome.spinoffs.size() == 30);
  CHECK(outcome.closed.size() == 30);  // parents close; children survive
  CHECK(state.firm_count() == 30);
  CHECK(outcome.firm_identity_holds());
}

TEST_CASE("firms shrinking below the floor close deterministically") {
  SectorParams p = quiet_params();
  p.epsilon = -0.9;  // size 1.0 -> 0.1, below the 0.5 floor
  WorldState state = world_of(10, 1.0, GridGeometry{10, 10, 1.0}, 1950);
  const auto outcome = step_demography(state, uniform_table(p), {}, 5);
  CHECK(outcome.closed.size() == 10);
  CHECK(state.firm_count() == 0);
  CHECK(outcome.firm_identity_holds());
}

TEST_CASE("spin-offs are born into the next year") {
  SectorParams p = quiet_params();
  p.spin_rate = 1.0;
  WorldState state = world_of(5, 10.0, GridGeometry{10, 10, 1.0}, 1975);
  const auto outcome = step_demography(state, uniform_table(p), {}, 8);
  REQUIRE(outcome.spinoffs.size() == 5);
  for (const auto& rec : outcome.spinoffs) {
    CHECK(rec.firm.born_year == 1976);
    CHECK(rec.firm.parent_id == rec.parent_id);
    const Firm* parent = state.find_firm(rec.parent_id);
    REQUIRE(parent != nullptr);
    CHECK(rec.firm.cell == parent->cell);
  }
}
