#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "firmscape/expectation.hpp"
#include "firmscape/registry.hpp"
#include "firmscape/relocation.hpp"
#include "firmscape/scenario.hpp"
#include "firmscape/snapshot.hpp"
#include "firmscape/synthetic.hpp"

namespace firmscape {

struct SectorYearStats {
  int year = 0;
  SectorId sector{};
  std::int64_t firms = 0;
  double employees = 0.0;
};

struct YearEvents {
  int year = 0;  // year the transition leads into
  std::int64_t grown = 0;
  std::int64_t closed = 0;
  std::int64_t spinoffs = 0;
  std::int64_t moves = 0;
  std::int64_t degraded_to_stay = 0;
  std::int64_t firms_before = 0;
  std::int64_t firms_after = 0;
  double employees_before = 0.0;
  double employees_after = 0.0;
  double growth_delta = 0.0;
  double closed_employees = 0.0;
  bool firm_identity = false;
  double employee_residual = 0.0;
};

struct YearTiming {
  int year = 0;
  double fields_ms = 0.0;
  double demography_ms = 0.0;
  double relocation_ms = 0.0;
  double snapshot_ms = 0.0;
};

struct RunReport {
  std::vector<SectorYearStats> aggregates;  // per year, per sector
  std::vector<YearEvents> events;            // per transition
  std::vector<YearTiming> timings;
  std::vector<std::string> snapshot_prefixes;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

inline void append_aggregates(RunReport& report, const WorldState& state) {
  std::array<SectorYearStats, kSectorCount> stats;
  std::array<NeumaierSum, kSectorCount> sums;
  for (int s = 0; s < kSectorCount; ++s) {
    stats[std::size_t(s)].year = state.year();
    stats[std::size_t(s)].sector = sector_from_index(s);
  }
  for (const Firm& f : state.firms()) {
    auto& row = stats[std::size_t(f.sector.index())];
    ++row.firms;
    sums[std::size_t(f.sector.index())].add(f.size);
  }
  for (int s = 0; s < kSectorCount; ++s) {
    stats[std::size_t(s)].employees = sums[std::size_t(s)].value();
    report.aggregates.push_back(stats[std::size_t(s)]);
  }
}

inline std::vector<Firm> initial_firms(const ScenarioConfig& config) {
  if (const auto* in_memory = std::get_if<InMemoryInput>(&config.input)) {
    return in_memory->firms;
  }
  if (const auto* files = std::get_if<FileInput>(&config.input)) {
    std::ifstream reg(files->registry_path);
    if (!reg) throw IoError("cannot open " + files->registry_path);
    std::vector<RegistryRecord> records;
    try {
      records = parse_registry(reg);
    } catch (const ValidationError& e) {
      throw ValidationError(files->registry_path + ": " + e.what());
    }
    std::ifstream mun(files->municipality_path);
    if (!mun) throw IoError("cannot open " + files->municipality_path);
    MunicipalityMap map;
    try {
      map = MunicipalityMap::parse(mun, config.grid);
    } catch (const ValidationError& e) {
      throw ValidationError(files->municipality_path + ": " + e.what());
    }
    return assign_to_cells(records, map, config.seed, config.start_year);
  }
  const auto& synth = std::get<SyntheticInput>(config.input);
  const SyntheticOutput generated = generate_synthetic(synth.spec, config.grid, config.seed);
  return assign_to_cells(generated.registry, generated.map, config.seed, config.start_year);
}

}  // namespace detail

// The year loop: potential fields from the start-of-year snapshot, the
// demographic pass and the relocation pass in the configured order, repeated
// from start_year to end_year with periodic snapshots. Everything is a pure
// function of (config, seed).
inline RunReport run(const ScenarioConfig& config) {
  config.validate();

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir);

  WorldState state = build_world(detail::initial_firms(config), config.grid, config.start_year);

  RunReport report;
  ExpectationController expectation;
  if (config.demography_mode == DemographyMode::Expectation) expectation.init(state);

  DemographyOptions demography_options;
  demography_options.order = config.demographic_order;
  demography_options.min_firm_size = config.min_firm_size;

  const auto snapshot_prefix = [&](int year) {
    return config.out_dir + "/snapshot_" + std::to_string(year);
  };
  const auto snapshot_due = [&](int year) {
    return (year - config.start_year) % config.snapshot_every == 0 || year == config.end_year;
  };

  detail::append_aggregates(report, state);
  if (snapshot_due(config.start_year)) {
    write_snapshot(state, snapshot_prefix(config.start_year));
    report.snapshot_prefixes.push_back(snapshot_prefix(config.start_year));
  }

  for (int year = config.start_year; year < config.end_year; ++year) {
    YearTiming timing;
    timing.year = year + 1;

    auto t0 = std::chrono::steady_clock::now();
    const PotentialField field = compute_fields(state, config.sectors, config.potential);
    timing.fields_ms = detail::ms_since(t0);

    DemographyOutcome demo;
    RelocationOutcome moves;

    const auto run_relocation = [&] {
      t0 = std::chrono::steady_clock::now();
      moves = step_relocation(state, field, config.sectors, config.relocation, config.seed,
                              config.utility);
      timing.relocation_ms = detail::ms_since(t0);
    };
    const auto run_demography = [&] {
      t0 = std::chrono::steady_clock::now();
      if (config.demography_mode == DemographyMode::Expectation)
        demo = expectation.step(state, config.sectors);
      else
        demo = step_demography(state, config.sectors, demography_options, config.seed);
      timing.demography_ms = detail::ms_since(t0);
    };

    if (config.relocation_first) {
      run_relocation();
      run_demography();
    } else {
      run_demography();
      run_relocation();
    }

    state.set_year(year + 1);

    YearEvents events;
    events.year = year + 1;
    events.grown = std::int64_t(demo.grown.size());
    events.closed = std::int64_t(demo.closed.size());
    events.spinoffs = std::int64_t(demo.spinoffs.size());
    events.moves = std::int64_t(moves.moves.size());
    events.degraded_to_stay = moves.degraded_to_stay;
    events.firms_before = demo.firms_before;
    events.firms_after = demo.firms_after;
    events.employees_before = demo.employees_before;
    events.employees_after = demo.employees_after;
    events.growth_delta = demo.growth_delta;
    events.closed_employees = demo.closed_employees;
    events.firm_identity = demo.firm_identity_holds();
    events.employee_residual = demo.employee_identity_residual();
    report.events.push_back(events);

    detail::append_aggregates(report, state);

    if (snapshot_due(year + 1)) {
      t0 = std::chrono::steady_clock::now();
      write_snapshot(state, snapshot_prefix(year + 1));
      report.snapshot_prefixes.push_back(snapshot_prefix(year + 1));
      timing.snapshot_ms = detail::ms_since(t0);
    }
    report.timings.push_back(timing);
  }

  // Report files.
  {
    std::ofstream out(config.out_dir + "/report.csv");
    if (!out) throw IoError("cannot open " + config.out_dir + "/report.csv");
    out << "year,sector,firms,employees\n";
    char buf[128];
    for (const auto& row : report.aggregates) {
      std::snprintf(buf, sizeof buf, "%d,%d,%lld,%.9f\n", row.year, row.sector.value,
                    (long long)row.firms, row.employees);
      out << buf;
    }
  }
  {
    std::ofstream out(config.out_dir + "/events.csv");
    if (!out) throw IoError("cannot open " + config.out_dir + "/events.csv");
    out << "year,grown,closed,spinoffs,moves,degraded_to_stay,firms_before,firms_after,"
           "employees_before,employees_after,growth_delta,closed_employees,firm_identity,"
           "employee_residual\n";
    char buf[320];
    for (const auto& e : report.events) {
      std::snprintf(buf, sizeof buf,
                    "%d,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%.9f,%.9f,%.9f,%.9f,%d,%.3e\n",
                    e.year, (long long)e.grown, (long long)e.closed, (long long)e.spinoffs,
                    (long long)e.moves, (long long)e.degraded_to_stay,
                    (long long)e.firms_before, (long long)e.firms_after, e.employees_before,
                    e.employees_after, e.growth_delta, e.closed_employees,
                    e.firm_identity ? 1 : 0, e.employee_residual);
      out << buf;
    }
  }
  {
    std::ofstream out(config.out_dir + "/timings.csv");
    if (!out) throw IoError("cannot open " + config.out_dir + "/timings.csv");
    out << "year,fields_ms,demography_ms,relocation_ms,snapshot_ms\n";
    char buf[160];
    for (const auto& t : report.timings) {
      std::snprintf(buf, sizeof buf, "%d,%.3f,%.3f,%.3f,%.3f\n", t.year, t.fields_ms,
                    t.demography_ms, t.relocation_ms, t.snapshot_ms);
      out << buf;
    }
  }
  return report;
}

}  // namespace firmscape
