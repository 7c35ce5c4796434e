#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "firmscape/calibration.hpp"
#include "firmscape/demography.hpp"

namespace firmscape {

// Deterministic demography: event probabilities applied as expected values.
// Each sector carries the continuous mean-field trajectory plus cumulative
// expected closure and spin-off counts; the agent population executes the
// rounded cumulative counts, so it tracks the trajectory within one event of
// each kind with no compounding drift. Closures and spin-offs run separately
// (not netted) because closures remove employees while spin-offs conserve
// them. Firms grow at the sector trend; closures take the firms nearest the
// current mean; spin-off parents are the largest firms and spin-off sizes
// collapse to the lognormal median. No RNG is consumed.
class ExpectationController {
 public:
  void init(const WorldState& state) {
    for (auto& t : track_) t = SectorTrack{};
    for (const Firm& f : state.firms()) {
      auto& t = track_[std::size_t(f.sector.index())];
      t.continuous.firms += 1.0;
      t.continuous.employees += f.size;
    }
    initialized_ = true;
  }

  const MeanFieldState& trajectory(SectorId sector) const {
    return track_[std::size_t(sector.index())].continuous;
  }

  DemographyOutcome step(WorldState& state, const SectorParamsTable& params) {
    if (!initialized_) init(state);

    DemographyOutcome outcome;
    outcome.firms_before = state.firm_count();
    {
      detail::NeumaierSum total;
      for (const Firm& f : state.firms()) total.add(f.size);
      outcome.employees_before = total.value();
    }

    // Per-sector id lists, sorted for determinism.
    std::array<std::vector<std::uint64_t>, kSectorCount> by_sector;
    for (const Firm& f : state.firms())
      by_sector[std::size_t(f.sector.index())].push_back(f.id);
    for (auto& ids : by_sector) std::sort(ids.begin(), ids.end());

    const int next_year = state.year() + 1;
    for (int s = 0; s < kSectorCount; ++s) {
      const SectorParams& sp = params[std::size_t(s)];
      auto& ids = by_sector[std::size_t(s)];
      SectorTrack& track = track_[std::size_t(s)];

      // Expected event counts for this year, from the continuous trajectory.
      if (track.continuous.firms > 0.0) {
        const double p_spin = spinoff_probability(track.continuous.mean_size(), sp);
        track.cum_closures += sp.theta * track.continuous.firms;
        track.cum_spinoffs += p_spin * track.continuous.firms;
      }
      track.continuous = mean_field_step(track.continuous, sp);

      // Trend growth for every firm.
      const double factor = 1.0 + sp.epsilon;
      for (std::uint64_t id : ids) {
        const double old_size = state.find_firm(id)->size;
        const double new_size = old_size * factor;
        outcome.growth_delta += new_size - old_size;
        state.set_firm_size(id, new_size);
        outcome.grown.emplace_back(id, new_size);
      }

      std::int64_t to_close =
          std::int64_t(std::llround(track.cum_closures)) - track.closures_done;
      to_close = std::clamp<std::int64_t>(to_close, 0, std::int64_t(ids.size()));
      if (to_close > 0) {
        // Closures remove mean-sized firms in the recursion; pick the set of
        // firms whose combined size tracks to_close times the current mean so
        // the employee totals follow suit even when sizes cluster away from
        // the mean.
        double mean = 0.0;
        for (std::uint64_t id : ids) mean += state.find_firm(id)->size;
        mean /= double(ids.size());
        std::multiset<std::pair<double, std::uint64_t>> pool;
        for (std::uint64_t id : ids) pool.insert({state.find_firm(id)->size, id});
        std::set<std::uint64_t> closed_now;
        double removed = 0.0;
        for (std::int64_t k = 0; k < to_close; ++k) {
          const double ideal = (double(to_close) * mean - removed) / double(to_close - k);
          auto it = pool.lower_bound({ideal, 0});
          if (it == pool.end()) {
            --it;
          } else if (it != pool.begin()) {
            const auto prev = std::prev(it);
            if (ideal - prev->first <= it->first - ideal) it = prev;
          }
          removed += it->first;
          outcome.closed.push_back(it->second);
          outcome.closed_employees += it->first;
          closed_now.insert(it->second);
          state.remove_firm(it->second);
          pool.erase(it);
        }
        std::erase_if(ids, [&](std::uint64_t id) { return closed_now.contains(id); });
        track.closures_done += to_close;
      }

      std::int64_t to_spawn =
          std::int64_t(std::llround(track.cum_spinoffs)) - track.spinoffs_done;
      if (to_spawn > 0 && !ids.empty()) {
        std::vector<std::uint64_t> order = ids;
        std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
          const double sa = state.find_firm(a)->size;
          const double sb = state.find_firm(b)->size;
          return sa != sb ? sa > sb : a < b;
        });
        const double sigma_nominal = std::exp(sp.spin_mu);
        std::size_t cursor = 0;
        std::size_t stalled = 0;
        while (to_spawn > 0 && stalled < order.size()) {
          const std::uint64_t parent_id = order[cursor];
          const Firm* parent = state.find_firm(parent_id);
          if (parent->size >= 2.0) {
            const SpinoffSplit split = spinoff_split(parent->size, sigma_nominal);
            Firm child;
            child.id = state.allocate_firm_id();
            child.sector = parent->sector;
            child.size = split.spinoff_size;
            child.cell = parent->cell;
            child.born_year = next_year;
            child.parent_id = parent_id;
            state.set_firm_size(parent_id, split.parent_size);
            state.add_firm(child);
            outcome.spinoffs.push_back({parent_id, child});
            --to_spawn;
            ++track.spinoffs_done;
            stalled = 0;
          } else {
            ++stalled;
          }
          cursor = cursor + 1 < order.size() ? cursor + 1 : 0;
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

 private:
  struct SectorTrack {
    MeanFieldState continuous{};
    double cum_closures = 0.0;
    double cum_spinoffs = 0.0;
    std::int64_t closures_done = 0;
    std::int64_t spinoffs_done = 0;
  };

  std::array<SectorTrack, kSectorCount> track_{};
  bool initialized_ = false;
};

}  // namespace firmscape
