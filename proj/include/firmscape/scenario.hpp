#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "firmscape/potential.hpp"
#include "firmscape/presets.hpp"
#include "firmscape/relocation.hpp"
#include "firmscape/synthetic.hpp"

namespace firmscape {

enum class DemographyMode { Stochastic, Expectation };

struct FileInput {
  std::string registry_path;
  std::string municipality_path;
};

struct SyntheticInput {
  SyntheticSpec spec;
};

// Pre-built firm list; programmatic use only, not expressible in config files.
struct InMemoryInput {
  std::vector<Firm> firms;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int start_year = presets::kStartYear;
  int end_year = presets::kEndYear;
  GridGeometry grid{125, 106, 1.0};
  SectorParamsTable sectors = presets::scenario_sector_params();
  RelocationParams relocation = presets::scenario_relocation_params();
  std::array<DemographicEvent, 3> demographic_order = {
      DemographicEvent::Growth, DemographicEvent::Closure, DemographicEvent::Spinoff};
  bool relocation_first = false;  // relocation before the demography pass
  DemographyMode demography_mode = DemographyMode::Stochastic;
  double min_firm_size = 0.5;
  FieldOptions potential{KernelMethod::Truncated, 30.0, false};
  UtilityOptions utility{};
  int snapshot_every = 6;
  std::string rng_algorithm = "philox4x32-10";
  std::variant<FileInput, SyntheticInput, InMemoryInput> input =
      SyntheticInput{};  // filled by presets
  std::string out_dir = "out";

  void validate() const {
    grid.validate();
    if (start_year >= end_year) throw ValidationError("start_year must precede end_year");
    for (int s = 0; s < kSectorCount; ++s) sectors[std::size_t(s)].validate(sector_from_index(s));
    relocation.validate();
    if (min_firm_size < 0.0) throw ValidationError("min_firm_size must be >= 0");
    if (snapshot_every < 1) throw ValidationError("snapshot_every must be >= 1");
    if (!(potential.radius > 0.0)) throw ValidationError("potential radius must be positive");
    if (rng_algorithm != "philox4x32-10")
      throw ValidationError("unsupported rng algorithm '" + rng_algorithm +
                            "' (supported: philox4x32-10)");
    {
      // demographic_order must be a permutation of the three events
      std::array<int, 3> seen{};
      for (auto e : demographic_order) ++seen[std::size_t(int(e))];
      if (seen != std::array<int, 3>{1, 1, 1})
        throw ValidationError("event_order must list growth, closure and spinoff once each");
    }
    if (const auto* files = std::get_if<FileInput>(&input)) {
      namespace fs = std::filesystem;
      if (!fs::exists(files->registry_path))
        throw ValidationError("registry file not found: " + files->registry_path);
      if (!fs::exists(files->municipality_path))
        throw ValidationError("municipality file not found: " + files->municipality_path);
    } else if (const auto* synth = std::get_if<SyntheticInput>(&input)) {
      synth->spec.validate();
    }
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  if (!obj.is_object())
    throw ValidationError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
  }
}

inline double radius_from_json(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ValidationError("potential.radius must be a number or \"inf\"");
  }
  return v.get<double>();
}

inline void sector_params_from_json(const json& obj, SectorParams& p, std::string_view where) {
  check_keys(obj,
             {"id", "epsilon", "theta", "spin_alpha", "spin_beta", "s_crit", "delta",
              "sigma_phi", "sigma_rho", "spin_mu", "spin_sigma", "decay_mp", "decay_ap",
              "decay_cp", "w_mp", "w_ap", "w_cp", "spin_orientation", "spin_rate"},
             where);
  if (obj.contains("epsilon")) p.epsilon = obj["epsilon"].get<double>();
  if (obj.contains("theta")) p.theta = obj["theta"].get<double>();
  if (obj.contains("spin_alpha")) p.spin_alpha = obj["spin_alpha"].get<double>();
  if (obj.contains("spin_beta")) p.spin_beta = obj["spin_beta"].get<double>();
  if (obj.contains("s_crit")) p.s_crit = obj["s_crit"].get<double>();
  if (obj.contains("delta")) p.delta = obj["delta"].get<double>();
  if (obj.contains("sigma_phi")) p.sigma_phi = obj["sigma_phi"].get<double>();
  if (obj.contains("sigma_rho")) p.sigma_rho = obj["sigma_rho"].get<double>();
  if (obj.contains("spin_mu")) p.spin_mu = obj["spin_mu"].get<double>();
  if (obj.contains("spin_sigma")) p.spin_sigma = obj["spin_sigma"].get<double>();
  if (obj.contains("decay_mp")) p.decay_mp = obj["decay_mp"].get<double>();
  if (obj.contains("decay_ap")) p.decay_ap = obj["decay_ap"].get<double>();
  if (obj.contains("decay_cp")) p.decay_cp = obj["decay_cp"].get<double>();
  if (obj.contains("w_mp")) p.w_mp = obj["w_mp"].get<double>();
  if (obj.contains("w_ap")) p.w_ap = obj["w_ap"].get<double>();
  if (obj.contains("w_cp")) p.w_cp = obj["w_cp"].get<double>();
  if (obj.contains("spin_orientation")) p.spin_orientation = obj["spin_orientation"].get<int>();
  if (obj.contains("spin_rate")) {
    if (obj["spin_rate"].is_null())
      p.spin_rate.reset();
    else
      p.spin_rate = obj["spin_rate"].get<double>();
  }
}

inline SyntheticSpec synthetic_from_json(const json& obj) {
  check_keys(obj, {"total_firms", "sectors", "sigma_log", "clustering", "municipality_block"},
             "input.synthetic");
  SyntheticSpec spec;
  if (obj.contains("sigma_log")) spec.sigma_log = obj["sigma_log"].get<double>();
  if (obj.contains("clustering")) spec.clustering = obj["clustering"].get<double>();
  if (obj.contains("municipality_block"))
    spec.municipality_block = obj["municipality_block"].get<int>();

  if (obj.contains("total_firms") && obj.contains("sectors"))
    throw ValidationError("input.synthetic: give either total_firms or sectors, not both");

  if (obj.contains("sectors")) {
    for (const auto& entry : obj["sectors"]) {
      check_keys(entry, {"id", "count", "mean_size", "employee_total"},
                 "input.synthetic.sectors[]");
      const int id = entry.at("id").get<int>();
      if (id < 1 || id > kSectorCount)
        throw ValidationError("input.synthetic.sectors[]: sector id out of range");
      auto& s = spec.sectors[std::size_t(id - 1)];
      s.count = entry.at("count").get<std::int64_t>();
      if (entry.contains("mean_size")) s.mean_size = entry["mean_size"].get<double>();
      if (entry.contains("employee_total"))
        s.employee_total = entry["employee_total"].get<std::int64_t>();
    }
  } else {
    // Apportion a national total over sectors by the historical 1950 shares
    // (largest remainder), with the historical mean sizes.
    const std::int64_t total = obj.contains("total_firms")
                                   ? obj["total_firms"].get<std::int64_t>()
                                   : 10000;
    if (total < 0) throw ValidationError("input.synthetic.total_firms must be >= 0");
    std::array<double, kSectorCount> quota{};
    std::array<std::int64_t, kSectorCount> counts{};
    std::int64_t assigned = 0;
    for (int s = 0; s < kSectorCount; ++s) {
      const auto& row = presets::kSectorTotals[std::size_t(s)];
      quota[std::size_t(s)] =
          double(total) * double(row.firms_1950) / double(presets::kTotalFirms1950);
      counts[std::size_t(s)] = std::int64_t(quota[std::size_t(s)]);
      assigned += counts[std::size_t(s)];
    }
    std::array<int, kSectorCount> by_remainder{};
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::sort(by_remainder.begin(), by_remainder.end(), [&](int a, int b) {
      const double ra = quota[std::size_t(a)] - double(counts[std::size_t(a)]);
      const double rb = quota[std::size_t(b)] - double(counts[std::size_t(b)]);
      return ra != rb ? ra > rb : a < b;
    });
    for (std::int64_t k = 0; k < total - assigned; ++k)
      ++counts[std::size_t(by_remainder[std::size_t(k % kSectorCount)])];
    for (int s = 0; s < kSectorCount; ++s) {
      const auto& row = presets::kSectorTotals[std::size_t(s)];
      spec.sectors[std::size_t(s)].count = counts[std::size_t(s)];
      spec.sectors[std::size_t(s)].mean_size =
          double(row.employees_1950) / double(row.firms_1950);
    }
  }
  return spec;
}

inline std::array<DemographicEvent, 3> event_order_from_string(const std::string& text,
                                                               bool& relocation_first) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(',', start);
    tokens.push_back(text.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (tokens.size() != 4)
    throw ValidationError("event_order must list four events, e.g. "
                          "'growth,closure,spinoff,relocation'");
  relocation_first = tokens.front() == "relocation";
  if (!relocation_first && tokens.back() != "relocation")
    throw ValidationError("event_order: relocation must come first or last");

  std::array<DemographicEvent, 3> order{};
  std::size_t idx = 0;
  for (const std::string& tok : tokens) {
    if (tok == "relocation") continue;
    if (idx >= 3) throw ValidationError("event_order: too many demographic events");
    if (tok == "growth")
      order[idx] = DemographicEvent::Growth;
    else if (tok == "closure")
      order[idx] = DemographicEvent::Closure;
    else if (tok == "spinoff")
      order[idx] = DemographicEvent::Spinoff;
    else
      throw ValidationError("event_order: unknown event '" + tok + "'");
    ++idx;
  }
  return order;
}

}  // namespace detail

// Full default configuration of the calibrated 1950-2004 scenario: the
// published demographic, relocation and potential parameter tables on a
// 125x106 grid, with a synthetic 10000-firm registry standing in for the
// confidential microdata.
inline nlohmann::json preset_json(const std::string& name) {
  if (name != "paper-2008")
    throw ValidationError("unknown preset '" + name + "' (available: paper-2008)");
  nlohmann::json j;
  j["seed"] = 1;
  j["start_year"] = presets::kStartYear;
  j["end_year"] = presets::kEndYear;
  j["grid"] = {{"ncols", 125}, {"nrows", 106}, {"cell_size", 1.0}};
  j["event_order"] = "growth,closure,spinoff,relocation";
  j["demography"] = {{"mode", "stochastic"}, {"min_firm_size", 0.5}, {"spin_orientation", 1}};
  j["potential"] = {{"method", "truncated"}, {"radius", 30.0}, {"weight_by_employment", false}};
  j["utility"] = {{"unweighted_sum", false}};
  j["relocation"] = {{"lambda_stay", presets::kLambdaStay},
                     {"lambda_occupied", presets::kLambdaOccupied},
                     {"lambda_unoccupied", presets::kLambdaUnoccupied}};
  j["snapshot_every"] = 6;
  j["rng"] = "philox4x32-10";
  const SectorParamsTable table = presets::scenario_sector_params();
  nlohmann::json sectors = nlohmann::json::array();
  for (int s = 0; s < kSectorCount; ++s) {
    const SectorParams& p = table[std::size_t(s)];
    sectors.push_back({{"id", s + 1},
                       {"epsilon", p.epsilon},
                       {"theta", p.theta},
                       {"spin_alpha", p.spin_alpha},
                       {"spin_beta", p.spin_beta},
                       {"s_crit", p.s_crit},
                       {"delta", p.delta},
                       {"sigma_phi", p.sigma_phi},
                       {"sigma_rho", p.sigma_rho},
                       {"spin_mu", p.spin_mu},
                       {"spin_sigma", p.spin_sigma},
                       {"decay_mp", p.decay_mp},
                       {"decay_ap", p.decay_ap},
                       {"decay_cp", p.decay_cp},
                       {"w_mp", p.w_mp},
                       {"w_ap", p.w_ap},
                       {"w_cp", p.w_cp}});
  }
  j["sectors"] = std::move(sectors);
  j["input"] = {{"synthetic",
                 {{"total_firms", 10000},
                  {"sigma_log", 0.9},
                  {"clustering", 1.0},
                  {"municipality_block", 5}}}};
  j["out_dir"] = "out";
  return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"seed", "start_year", "end_year", "grid", "event_order", "demography",
                      "potential", "utility", "relocation", "snapshot_every", "rng", "sectors",
                      "sector_overrides", "input", "out_dir"},
                     "config");
  ScenarioConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("start_year")) cfg.start_year = j["start_year"].get<int>();
  if (j.contains("end_year")) cfg.end_year = j["end_year"].get<int>();
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::check_keys(g, {"ncols", "nrows", "cell_size"}, "grid");
    if (g.contains("ncols")) cfg.grid.ncols = g["ncols"].get<std::int32_t>();
    if (g.contains("nrows")) cfg.grid.nrows = g["nrows"].get<std::int32_t>();
    if (g.contains("cell_size")) cfg.grid.cell_size = g["cell_size"].get<double>();
  }
  if (j.contains("event_order"))
    cfg.demographic_order = detail::event_order_from_string(
        j["event_order"].get<std::string>(), cfg.relocation_first);
  if (j.contains("demography")) {
    const auto& d = j["demography"];
    detail::check_keys(d, {"mode", "min_firm_size", "spin_orientation"}, "demography");
    if (d.contains("mode")) {
      const auto mode = d["mode"].get<std::string>();
      if (mode == "stochastic")
        cfg.demography_mode = DemographyMode::Stochastic;
      else if (mode == "expectation")
        cfg.demography_mode = DemographyMode::Expectation;
      else
        throw ValidationError("demography.mode must be 'stochastic' or 'expectation'");
    }
    if (d.contains("min_firm_size")) cfg.min_firm_size = d["min_firm_size"].get<double>();
    if (d.contains("spin_orientation")) {
      const int orientation = d["spin_orientation"].get<int>();
      for (auto& p : cfg.sectors) p.spin_orientation = orientation;
    }
  }
  if (j.contains("potential")) {
    const auto& p = j["potential"];
    detail::check_keys(p, {"method", "radius", "weight_by_employment"}, "potential");
    if (p.contains("method")) {
      const auto method = p["method"].get<std::string>();
      if (method == "truncated")
        cfg.potential.method = KernelMethod::Truncated;
      else if (method == "exact")
        cfg.potential.method = KernelMethod::Exact;
      else
        throw ValidationError("potential.method must be 'truncated' or 'exact'");
    }
    if (p.contains("radius")) cfg.potential.radius = detail::radius_from_json(p["radius"]);
    if (p.contains("weight_by_employment"))
      cfg.potential.weight_by_employment = p["weight_by_employment"].get<bool>();
  }
  if (j.contains("utility")) {
    detail::check_keys(j["utility"], {"unweighted_sum"}, "utility");
    if (j["utility"].contains("unweighted_sum"))
      cfg.utility.unweighted_sum = j["utility"]["unweighted_sum"].get<bool>();
  }
  if (j.contains("relocation")) {
    const auto& r = j["relocation"];
    detail::check_keys(r, {"lambda_stay", "lambda_occupied", "lambda_unoccupied"}, "relocation");
    if (r.contains("lambda_stay")) cfg.relocation.lambda_stay = r["lambda_stay"].get<double>();
    if (r.contains("lambda_occupied"))
      cfg.relocation.lambda_occupied = r["lambda_occupied"].get<double>();
    if (r.contains("lambda_unoccupied"))
      cfg.relocation.lambda_unoccupied = r["lambda_unoccupied"].get<double>();
  }
  if (j.contains("snapshot_every")) cfg.snapshot_every = j["snapshot_every"].get<int>();
  if (j.contains("rng")) cfg.rng_algorithm = j["rng"].get<std::string>();
  if (j.contains("sectors")) {
    const auto& sectors = j["sectors"];
    if (!sectors.is_array() || sectors.size() != kSectorCount)
      throw ValidationError("sectors must be an array of 21 entries");
    const int orientation = cfg.sectors[0].spin_orientation;
    for (const auto& entry : sectors) {
      const int id = entry.at("id").get<int>();
      if (id < 1 || id > kSectorCount) throw ValidationError("sectors[]: id out of range");
      SectorParams p;  // full replacement semantics for the sectors table
      p.spin_orientation = orientation;
      detail::sector_params_from_json(entry, p, "sectors[]");
      cfg.sectors[std::size_t(id - 1)] = p;
    }
  }
  if (j.contains("sector_overrides")) {
    for (const auto& entry : j["sector_overrides"]) {
      const int id = entry.at("id").get<int>();
      if (id < 1 || id > kSectorCount)
        throw ValidationError("sector_overrides[]: id out of range");
      detail::sector_params_from_json(entry, cfg.sectors[std::size_t(id - 1)],
                                      "sector_overrides[]");
    }
  }
  if (j.contains("input")) {
    const auto& in = j["input"];
    detail::check_keys(in, {"registry", "municipalities", "synthetic"}, "input");
    if (in.contains("synthetic")) {
      if (in.contains("registry") || in.contains("municipalities"))
        throw ValidationError("input: give either files or synthetic, not both");
      cfg.input = SyntheticInput{detail::synthetic_from_json(in["synthetic"])};
    } else {
      if (!in.contains("registry") || !in.contains("municipalities"))
        throw ValidationError("input: registry and municipalities paths are both required");
      cfg.input = FileInput{in["registry"].get<std::string>(),
                            in["municipalities"].get<std::string>()};
    }
  }
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  return cfg;
}

// Assemble a config: preset base, optional config-file merge (RFC 7386; the
// sectors array replaces wholesale, use sector_overrides for spot changes),
// then command-line overrides.
inline ScenarioConfig load_scenario(const std::string& preset,
                                    const std::optional<std::string>& config_path,
                                    const std::optional<std::uint64_t>& seed,
                                    const std::optional<std::string>& out_dir) {
  nlohmann::json base = preset_json(preset);
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ValidationError("cannot open config " + *config_path);
    nlohmann::json user;
    try {
      user = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(*config_path + ": " + e.what());
    }
    base.merge_patch(user);
  }
  ScenarioConfig cfg = scenario_from_json(base);
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  return cfg;
}

}  // namespace firmscape
