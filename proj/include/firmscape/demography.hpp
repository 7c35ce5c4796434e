#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "firmscape/rng.hpp"
#include "firmscape/world.hpp"

namespace firmscape {

enum class DemographicEvent { Growth, Closure, Spinoff };

struct DemographyOptions {
  std::array<DemographicEvent, 3> order = {DemographicEvent::Growth, DemographicEvent::Closure,
                                           DemographicEvent::Spinoff};
  // A firm whose size falls below this after growth closes deterministically.
  double min_firm_size = 0.5;
};

// Event log of one demographic year, plus the bookkeeping totals needed to
// check the firm-count and employee recursions.
struct DemographyOutcome {
  struct SpinoffRecord {
    std::uint64_t parent_id;
    Firm firm;
  };

  std::vector<std::pair<std::uint64_t, double>> grown;  // (firm_id, new size)
  std::vector<std::uint64_t> closed;
  std::vector<SpinoffRecord> spinoffs;

  std::int64_t firms_before = 0;
  std::int64_t firms_after = 0;
  double employees_before = 0.0;
  double employees_after = 0.0;
  double growth_delta = 0.0;       // sum of size changes from growth
  double closed_employees = 0.0;   // employees removed by closures

  // firms_after == firms_before - closures + spinoffs, exact in integers.
  bool firm_identity_holds() const {
    return firms_after ==
           firms_before - std::int64_t(closed.size()) + std::int64_t(spinoffs.size());
  }

  // employees_after == employees_before + growth - closures, up to summation
  // order (spin-offs conserve employees). Callers compare the residual
  // against a 1e-9 relative band.
  double employee_identity_residual() const {
    return employees_after - (employees_before + growth_delta - closed_employees);
  }
};

// Annual growth: size * (1 + epsilon + phi).
inline double grow_firm_with_noise(double size, double epsilon, double phi) {
  return size * (1.0 + epsilon + phi);
}

inline double grow_firm(double size, const SectorParams& params, rng::Stream& stream) {
  return grow_firm_with_noise(size, params.epsilon, stream.normal(0.0, params.sigma_phi));
}

// Closure probability theta + rho, clamped to [0,1].
inline double closure_probability_with_noise(double theta, double rho) {
  return std::clamp(theta + rho, 0.0, 1.0);
}

inline double closure_probability(const SectorParams& params, rng::Stream& stream) {
  return closure_probability_with_noise(params.theta, stream.normal(0.0, params.sigma_rho));
}

// Spin-off probability. Logistic in firm size by default; a fitted constant
// rate when params.spin_rate is set.
inline double spinoff_probability(double size, const SectorParams& params) {
  if (params.spin_rate) return std::clamp(*params.spin_rate, 0.0, 1.0);
  const double arg =
      params.spin_orientation * (params.spin_alpha * size - params.spin_beta) / params.s_crit;
  return 1.0 / (1.0 + std::exp(arg));
}

struct SpinoffSplit {
  double parent_size;
  double spinoff_size;
};

// Clamp the drawn spin-off size into [1, parent-1], then renormalise the pair
// so the two parts sum back to the parent bit-exactly: for any doubles,
// parent - (parent - sigma) makes the complement exact in at most one extra
// subtraction.
inline SpinoffSplit spinoff_split(double parent_size, double sigma_draw) {
  double sigma = std::clamp(sigma_draw, 1.0, parent_size - 1.0);
  const double rest = parent_size - sigma;
  sigma = parent_size - rest;
  return SpinoffSplit{rest, sigma};
}

// Split a parent firm: the spin-off inherits sector and cell, keeps lineage,
// and the employee total is conserved exactly.
inline std::pair<double, Firm> execute_spinoff(const Firm& parent, const SectorParams& params,
                                               std::uint64_t spinoff_id, int born_year,
                                               rng::Stream& stream) {
  if (parent.size < 2.0)
    throw ValidationError("firm " + std::to_string(parent.id) +
                          ": spin-off requires size >= 2");
  const double draw = stream.lognormal(params.spin_mu, params.spin_sigma);
  const SpinoffSplit split = spinoff_split(parent.size, draw);
  Firm child;
  child.id = spinoff_id;
  child.sector = parent.sector;
  child.size = split.spinoff_size;
  child.cell = parent.cell;
  child.born_year = born_year;
  child.parent_id = parent.id;
  return {split.parent_size, child};
}

// One demographic year over the whole population. Firms are visited in a
// seeded-shuffled order; each firm runs the configured event sequence with
// its own (seed, year, firm, purpose) substreams, so outcomes do not depend
// on storage order. Spin-offs are born into the following year and are not
// processed this year.
inline DemographyOutcome step_demography(WorldState& state, const SectorParamsTable& params,
                                         const DemographyOptions& options, std::uint64_t seed) {
  DemographyOutcome outcome;
  outcome.firms_before = state.firm_count();
  {
    detail::NeumaierSum total;
    for (const Firm& f : state.firms()) total.add(f.size);
    outcome.employees_before = total.value();
  }

  std::vector<std::uint64_t> order = state.sorted_firm_ids();
  {
    auto shuffle_stream =
        rng::substream(seed, state.year(), 0, rng::Purpose::ShuffleDemography);
    rng::shuffle(order, shuffle_stream);
  }

  const int year = state.year();
  for (std::uint64_t id : order) {
    const Firm* firm = state.find_firm(id);
    const SectorParams& sp = params[std::size_t(firm->sector.index())];
    bool alive = true;

    for (DemographicEvent event : options.order) {
      if (!alive) break;
      switch (event) {
        case DemographicEvent::Growth: {
          auto stream = rng::substream(seed, year, id, rng::Purpose::Growth);
          const double old_size = firm->size;
          const double new_size = grow_firm(old_size, sp, stream);
          outcome.growth_delta += new_size - old_size;
          outcome.grown.emplace_back(id, new_size);
          if (new_size < options.min_firm_size) {
            outcome.closed.push_back(id);
            outcome.closed_employees += new_size;
            state.remove_firm(id);
            alive = false;
          } else {
            state.set_firm_size(id, new_size);
          }
          break;
        }
        case DemographicEvent::Closure: {
          auto stream = rng::substream(seed, year, id, rng::Purpose::Closure);
          const double p_close = closure_probability(sp, stream);
          if (stream.uniform01() < p_close) {
            outcome.closed.push_back(id);
            outcome.closed_employees += firm->size;
            state.remove_firm(id);
            alive = false;
          }
          break;
        }
        case DemographicEvent::Spinoff: {
          if (firm->size < 2.0) break;
          const double p_spin = spinoff_probability(firm->size, sp);
          auto stream = rng::substream(seed, year, id, rng::Purpose::Spinoff);
          if (stream.uniform01() < p_spin) {
            auto size_stream = rng::substream(seed, year, id, rng::Purpose::SpinoffSize);
            auto [parent_size, child] =
                execute_spinoff(*firm, sp, state.allocate_firm_id(), year + 1, size_stream);
            state.set_firm_size(id, parent_size);
            state.add_firm(child);
            outcome.spinoffs.push_back({id, child});
            firm = state.find_firm(id);  // add_firm may reallocate
          }
          break;
        }
      }
    }
  }

  outcome.firms_after = state.firm_count();
  {
    detail::NeumaierSum total;
    for (const Firm& f : state.firms()) total.add(f.size);
    outcome.employees_after = total.value();
  }
  return outcome;
}

}  // namespace firmscape
