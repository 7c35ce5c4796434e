#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "firmscape/potential.hpp"
#include "firmscape/rng.hpp"
#include "firmscape/world.hpp"

namespace firmscape {

enum class RelocationMode { Stay, MoveToOccupied, MoveToUnoccupied };

// Categorical draw in fixed order with cumulative thresholds
// (stay, stay+occupied, 1).
inline RelocationMode mode_from_uniform(const RelocationParams& params, double u) {
  if (u < params.lambda_stay) return RelocationMode::Stay;
  if (u < params.lambda_stay + params.lambda_occupied) return RelocationMode::MoveToOccupied;
  return RelocationMode::MoveToUnoccupied;
}

inline RelocationMode sample_mode(const RelocationParams& params, rng::Stream& stream) {
  return mode_from_uniform(params, stream.uniform01());
}

struct UtilityOptions {
  // When set, utility drops the per-sector weights and sums all three
  // surfaces over every sector instead (plus the distance term).
  bool unweighted_sum = false;
};

// Candidate destinations for a relocating firm. The current cell is excluded
// from both modes.
inline std::vector<CellId> candidate_cells(const WorldState& state, SectorId sector,
                                           RelocationMode mode, CellId current) {
  std::vector<CellId> cells;
  const GridGeometry& grid = state.grid();
  const auto& occ = state.occupancy_raw();
  const auto sidx = std::size_t(sector.index());
  for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
    const CellId cell = grid.cell_at(i);
    if (cell == current) continue;
    const bool occupied = occ[std::size_t(i) * kSectorCount + sidx] > 0;
    if (mode == RelocationMode::MoveToOccupied ? occupied : !occupied) cells.push_back(cell);
  }
  return cells;
}

// Utility of moving to cell l: distance inertia plus the weighted potential
// surfaces at l for the firm's sector.
inline double location_utility(CellId l, const Firm& firm, const PotentialField& field,
                               const SectorParams& params, CellId origin,
                               const UtilityOptions& options = {}) {
  const double inertia = params.delta * cell_distance(origin, l, field.grid());
  if (options.unweighted_sum) {
    double sum = 0.0;
    for (int s = 0; s < kSectorCount; ++s) {
      const SectorId sid = sector_from_index(s);
      sum += field.mp(l, sid) + field.ap(l, sid) + field.cp(l, sid);
    }
    return inertia + sum;
  }
  return inertia + params.w_mp * field.mp(l, firm.sector) +
         params.w_ap * field.ap(l, firm.sector) + params.w_cp * field.cp(l, firm.sector);
}

// Argmax of location_utility over the candidate set. Exact ties are broken
// uniformly at random; an empty candidate set returns the origin.
inline CellId choose_destination(const Firm& firm, RelocationMode mode, const WorldState& state,
                                 const PotentialField& field, const SectorParams& params,
                                 rng::Stream& tie_stream, const UtilityOptions& options = {}) {
  const std::vector<CellId> candidates = candidate_cells(state, firm.sector, mode, firm.cell);
  if (candidates.empty()) return firm.cell;

  double best = -std::numeric_limits<double>::infinity();
  std::vector<CellId> maximizers;
  for (CellId cell : candidates) {
    const double u = location_utility(cell, firm, field, params, firm.cell, options);
    if (u > best) {
      best = u;
      maximizers.assign(1, cell);
    } else if (u == best) {
      maximizers.push_back(cell);
    }
  }
  if (maximizers.size() == 1) return maximizers.front();
  return maximizers[std::size_t(tie_stream.bounded(maximizers.size()))];
}

struct RelocationOutcome {
  std::vector<std::pair<std::uint64_t, CellId>> moves;
  std::int64_t stays = 0;             // stay draws
  std::int64_t degraded_to_stay = 0;  // empty candidate sets
};

// One relocation year. Firms are visited in seeded-shuffled order; candidate
// sets read live occupancy (later movers see earlier moves) while the
// potential surfaces stay frozen at the start-of-year snapshot. Firms born
// after the snapshot year sit the year out.
inline RelocationOutcome step_relocation(WorldState& state, const PotentialField& field,
                                         const SectorParamsTable& params,
                                         const RelocationParams& relocation, std::uint64_t seed,
                                         const UtilityOptions& options = {}) {
  relocation.validate();
  RelocationOutcome outcome;

  std::vector<std::uint64_t> order = state.sorted_firm_ids();
  {
    auto shuffle_stream =
        rng::substream(seed, state.year(), 0, rng::Purpose::ShuffleRelocation);
    rng::shuffle(order, shuffle_stream);
  }

  const int year = state.year();
  for (std::uint64_t id : order) {
    const Firm* firm = state.find_firm(id);
    if (firm->born_year > year) continue;

    auto mode_stream = rng::substream(seed, year, id, rng::Purpose::Mode);
    const RelocationMode mode = sample_mode(relocation, mode_stream);
    if (mode == RelocationMode::Stay) {
      ++outcome.stays;
      continue;
    }

    auto tie_stream = rng::substream(seed, year, id, rng::Purpose::TieBreak);
    const SectorParams& sp = params[std::size_t(firm->sector.index())];
    const CellId dest = choose_destination(*firm, mode, state, field, sp, tie_stream, options);
    if (dest == firm->cell) {
      ++outcome.degraded_to_stay;
      continue;
    }
    state.apply_move(id, dest);
    outcome.moves.emplace_back(id, dest);
  }
  return outcome;
}

}  // namespace firmscape
