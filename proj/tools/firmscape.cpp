// firmscape: agent-based simulator of the spatial distribution of firms.
//
// Subcommands:
//   run              simulate a scenario and write snapshots + reports
//   calibrate        fit per-sector demographic rates to aggregate targets
//   analyze          rank-size and concentration metrics for a snapshot raster
//   validate-config  check a scenario configuration and exit
//
// Exit codes: 0 success, 1 validation error, 2 runtime/IO error.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "firmscape/analysis.hpp"
#include "firmscape/calibration.hpp"
#include "firmscape/runner.hpp"
#include "firmscape/scenario.hpp"

namespace {

using namespace firmscape;

struct CommonScenarioArgs {
  std::string preset = "paper-2008";
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_scenario_options(CLI::App* cmd, CommonScenarioArgs& args) {
  cmd->add_option("--preset", args.preset, "Named parameter preset")
      ->default_val("paper-2008");
  cmd->add_option("--config", args.config_path,
                  "JSON scenario config merged over the preset");
  cmd->add_option("--seed", args.seed, "Override the scenario seed");
  cmd->add_option("--out", args.out_dir, "Override the output directory");
}

int cmd_run(const CommonScenarioArgs& args) {
  const ScenarioConfig cfg =
      load_scenario(args.preset, args.config_path, args.seed, args.out_dir);
  const RunReport report = run(cfg);

  double total_ms = 0.0;
  for (const auto& t : report.timings)
    total_ms += t.fields_ms + t.demography_ms + t.relocation_ms + t.snapshot_ms;
  std::int64_t firms_final = 0;
  for (auto it = report.aggregates.rbegin();
       it != report.aggregates.rend() && it->year == cfg.end_year; ++it)
    firms_final += it->firms;
  std::printf("simulated %d years (%d..%d), %lld firms at end, %.1f ms\n",
              cfg.end_year - cfg.start_year, cfg.start_year, cfg.end_year,
              (long long)firms_final, total_ms);
  std::printf("outputs in %s (report.csv, events.csv, timings.csv, %zu snapshots)\n",
              cfg.out_dir.c_str(), report.snapshot_prefixes.size());
  return 0;
}

int cmd_calibrate(const std::string& targets_path, const std::string& out_path, int horizon,
                  double tolerance) {
  std::ifstream in(targets_path);
  if (!in) throw IoError("cannot open " + targets_path);
  std::vector<CalibrationTarget> targets;
  try {
    targets = parse_targets(in, horizon);
  } catch (const ValidationError& e) {
    throw ValidationError(targets_path + ": " + e.what());
  }

  FitSpec spec;
  spec.tolerance = tolerance;
  std::vector<CalibrationResult> results;
  int flagged = 0;
  for (const auto& target : targets) {
    CalibrationResult result;
    try {
      result = fit_sector(target, spec);
    } catch (const ValidationError& e) {
      std::fprintf(stderr, "sector %d: %s\n", target.sector.value, e.what());
      result.sector = target.sector;
      result.converged = false;
    }
    if (!result.converged) ++flagged;
    results.push_back(result);
  }

  if (out_path == "-") {
    write_results(std::cout, results);
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    write_results(out, results);
  }
  std::fprintf(stderr, "fitted %zu sectors, %d flagged non-converged\n", results.size(),
               flagged);
  return 0;
}

int cmd_analyze(const std::string& raster_path, const std::optional<std::string>& compare_path,
                const std::string& out_path, const std::optional<std::string>& rank_size_path) {
  std::ifstream in(raster_path);
  if (!in) throw IoError("cannot open " + raster_path);
  const auto rows = read_snapshot_raster(in);
  const auto analyses = analyze_raster(rows);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (out_path != "-") {
    file.open(out_path);
    if (!file) throw IoError("cannot open " + out_path + " for writing");
    out = &file;
  }
  write_analysis(*out, analyses);

  if (rank_size_path) {
    std::ofstream rs(*rank_size_path);
    if (!rs) throw IoError("cannot open " + *rank_size_path + " for writing");
    write_rank_size_table(rs, rows);
  }

  if (compare_path) {
    std::ifstream cmp(*compare_path);
    if (!cmp) throw IoError("cannot open " + *compare_path);
    const auto other = read_snapshot_raster(cmp);
    const auto diff = raster_diff(rows, other);
    *out << "\ncol,row,sector,delta\n";
    for (const auto& d : diff)
      *out << d.cell.col << ',' << d.cell.row << ',' << d.sector.value << ',' << d.count
           << '\n';
  }
  return 0;
}

int cmd_validate(const CommonScenarioArgs& args) {
  const ScenarioConfig cfg =
      load_scenario(args.preset, args.config_path, args.seed, args.out_dir);
  cfg.validate();
  const char* input_kind = std::holds_alternative<FileInput>(cfg.input) ? "files" : "synthetic";
  std::printf("config ok: years %d..%d, grid %dx%d, input %s, seed %llu, out %s\n",
              cfg.start_year, cfg.end_year, cfg.grid.ncols, cfg.grid.nrows, input_kind,
              (unsigned long long)cfg.seed, cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agent-based simulator of the spatial distribution of firms"};
  app.require_subcommand(1);

  CommonScenarioArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario");
  add_scenario_options(run_cmd, run_args);

  std::string targets_path;
  std::string calibrate_out = "-";
  int horizon = 54;
  double tolerance = 1e-3;
  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "Fit demographic rates to aggregate targets");
  calibrate_cmd->add_option("--targets", targets_path, "Targets CSV")->required();
  calibrate_cmd->add_option("--out", calibrate_out, "Results CSV path, '-' for stdout");
  calibrate_cmd->add_option("--horizon", horizon, "Years between the two observations")
      ->default_val(54);
  calibrate_cmd->add_option("--tol", tolerance, "Relative objective tolerance")
      ->default_val(1e-3);

  std::string raster_path;
  std::optional<std::string> compare_path;
  std::optional<std::string> rank_size_path;
  std::string analyze_out = "-";
  auto* analyze_cmd = app.add_subcommand("analyze", "Concentration metrics for a raster");
  analyze_cmd->add_option("--raster", raster_path, "Snapshot raster CSV")->required();
  analyze_cmd->add_option("--compare", compare_path,
                          "Second raster; appends a cell-level delta report");
  analyze_cmd->add_option("--rank-size", rank_size_path,
                          "Also write the per-sector rank-size table here");
  analyze_cmd->add_option("--out", analyze_out, "Report path, '-' for stdout");

  CommonScenarioArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate-config", "Check a scenario config");
  add_scenario_options(validate_cmd, validate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (calibrate_cmd->parsed())
      return cmd_calibrate(targets_path, calibrate_out, horizon, tolerance);
    if (analyze_cmd->parsed())
      return cmd_analyze(raster_path, compare_path, analyze_out, rank_size_path);
    if (validate_cmd->parsed()) return cmd_validate(validate_args);
  } catch (const firmscape::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
