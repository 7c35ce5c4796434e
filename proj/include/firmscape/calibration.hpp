#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <utility>
#include <vector>

#include "firmscape/csv.hpp"
#include "firmscape/demography.hpp"

namespace firmscape {

inline constexpr std::string_view kTargetsHeader =
    "sector,firms_t0,employees_t0,firms_T,employees_T";
inline constexpr std::string_view kResultsHeader =
    "sector,epsilon,theta,spin_rate,xi,psi,iterations,converged";

struct CalibrationTarget {
  SectorId sector{};
  std::int64_t firms_t0 = 0;
  std::int64_t employees_t0 = 0;
  std::int64_t firms_T = 0;
  std::int64_t employees_T = 0;
  int horizon_years = 54;
};

struct CalibrationResult {
  SectorId sector{};
  double epsilon = 0.0;
  double theta = 0.0;
  double spin_rate = 0.0;
  double xi = 0.0;   // |predicted employees - observed|
  double psi = 0.0;  // |predicted firms - observed|
  int iterations = 0;
  bool converged = false;
};

// Continuous per-sector aggregate state for the deterministic mean-field
// recursion.
struct MeanFieldState {
  double firms = 0.0;
  double employees = 0.0;

  double mean_size() const { return firms > 0.0 ? employees / firms : 0.0; }
};

// One year of the expected-value recursion:
//   firms'     = firms * (1 - theta + p_spin)          (p_spin at mean size)
//   employees' = employees * (1 + epsilon) * (1 - theta)
// Closures remove mean-sized firms; spin-offs conserve employees.
inline MeanFieldState mean_field_step(const MeanFieldState& state, const SectorParams& params) {
  if (state.firms <= 0.0 || state.employees <= 0.0) return MeanFieldState{0.0, 0.0};
  const double p_spin = spinoff_probability(state.mean_size(), params);
  MeanFieldState next;
  next.firms = state.firms * (1.0 - params.theta + p_spin);
  next.employees = state.employees * (1.0 + params.epsilon) * (1.0 - params.theta);
  if (next.firms < 0.0 || next.employees < 0.0)
    throw ValidationError("mean-field recursion produced negative totals");
  return next;
}

// Expected totals after `horizon` years, carrying the mean firm size across
// steps.
inline std::pair<double, double> expected_totals(const SectorParams& params, double firms_t0,
                                                 double employees_t0, int horizon) {
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  MeanFieldState state{firms_t0, employees_t0};
  for (int t = 0; t < horizon; ++t) state = mean_field_step(state, params);
  return {state.firms, state.employees};
}

// Absolute end-year objectives (employees, firms).
inline std::pair<double, double> objective(const SectorParams& params,
                                           const CalibrationTarget& target) {
  const auto [firms, employees] =
      expected_totals(params, double(target.firms_t0), double(target.employees_t0),
                      target.horizon_years);
  return {std::abs(employees - double(target.employees_T)),
          std::abs(firms - double(target.firms_T))};
}

struct FitSpec {
  double epsilon_lo = -0.1;
  double epsilon_hi = 0.1;
  double theta_lo = 0.0;
  double theta_hi = 0.05;
  double spin_lo = 0.0;
  double spin_hi = 0.15;
  double tolerance = 1e-3;  // relative, per objective
  int max_iterations = 16;
};

// Fit (epsilon, theta, spin rate) by coordinate descent on the mean-field
// recursion: the net firm growth rate is solved first against the firm
// target, split into closure and spin-off rates with minimal magnitudes,
// then epsilon is solved against the employee target. Deterministic; no RNG.
// Targets whose net rates fall outside the bounds come back converged=false
// with the clamped best effort.
inline CalibrationResult fit_sector(const CalibrationTarget& target, const FitSpec& spec = {}) {
  if (target.horizon_years < 1) throw ValidationError("horizon must be >= 1");
  if (target.firms_t0 <= 0 || target.employees_t0 <= 0)
    throw ValidationError("sector " + std::to_string(target.sector.value) +
                          ": start totals must be positive");

  CalibrationResult result;
  result.sector = target.sector;
  const double horizon = double(target.horizon_years);

  SectorParams params;  // only the demographic subset matters here
  params.sigma_phi = 0.0;
  params.sigma_rho = 0.0;

  for (int iter = 1; iter <= spec.max_iterations; ++iter) {
    result.iterations = iter;

    // Net firm growth per year solved in closed form, then clamped.
    const double g_needed =
        std::exp(std::log(double(target.firms_T) / double(target.firms_t0)) / horizon) - 1.0;
    const double g = std::clamp(g_needed, -spec.theta_hi, spec.spin_hi);
    if (g >= 0.0) {
      result.spin_rate = std::min(g, spec.spin_hi);
      result.theta = result.spin_rate - g;
    } else {
      result.theta = std::min(-g, spec.theta_hi);
      result.spin_rate = result.theta + g;
    }

    // Employee growth factor per year, given theta.
    const double y_needed =
        std::exp(std::log(double(target.employees_T) / double(target.employees_t0)) / horizon);
    const double eps_needed = y_needed / (1.0 - result.theta) - 1.0;
    result.epsilon = std::clamp(eps_needed, spec.epsilon_lo, spec.epsilon_hi);

    params.epsilon = result.epsilon;
    params.theta = result.theta;
    params.spin_rate = result.spin_rate;
    const auto [xi, psi] = objective(params, target);
    result.xi = xi;
    result.psi = psi;
    const bool xi_ok = xi <= spec.tolerance * double(target.employees_T);
    const bool psi_ok = psi <= spec.tolerance * double(target.firms_T);
    if (xi_ok && psi_ok) {
      result.converged = true;
      break;
    }
    // The coordinate solves are closed-form, so a second pass cannot improve
    // on a clamped solution.
    if (g != g_needed || result.epsilon != eps_needed) break;
  }
  return result;
}

// Apply a fit to a parameter set: demographic rates from the fit, noise off,
// spin-offs at the fitted constant rate.
inline SectorParams apply_fit(SectorParams base, const CalibrationResult& fit) {
  base.epsilon = fit.epsilon;
  base.theta = fit.theta;
  base.spin_rate = fit.spin_rate;
  base.sigma_phi = 0.0;
  base.sigma_rho = 0.0;
  return base;
}

inline std::vector<CalibrationTarget> parse_targets(std::istream& in, int horizon_years = 54) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("targets: empty input");
  csv::expect_header(line, kTargetsHeader);
  std::vector<CalibrationTarget> targets;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = csv::trim_cr(line);
    if (view.empty()) continue;
    const auto fields = csv::split(view);
    if (fields.size() != 5)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 5 columns, got " +
                            std::to_string(fields.size()));
    CalibrationTarget t;
    t.sector = SectorId{int(csv::parse_int(fields[0], line_no, "sector"))};
    t.firms_t0 = csv::parse_int(fields[1], line_no, "firms_t0");
    t.employees_t0 = csv::parse_int(fields[2], line_no, "employees_t0");
    t.firms_T = csv::parse_int(fields[3], line_no, "firms_T");
    t.employees_T = csv::parse_int(fields[4], line_no, "employees_T");
    t.horizon_years = horizon_years;
    if (!t.sector.valid())
      throw ValidationError("line " + std::to_string(line_no) + ": sector out of range");
    targets.push_back(t);
  }
  return targets;
}

inline void write_results(std::ostream& out, const std::vector<CalibrationResult>& results) {
  out << kResultsHeader << '\n';
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%s\n", r.sector.value,
                  r.epsilon, r.theta, r.spin_rate, r.xi, r.psi, r.iterations,
                  r.converged ? "true" : "false");
    out << buf;
  }
}

}  // namespace firmscape
