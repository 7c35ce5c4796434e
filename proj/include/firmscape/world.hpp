#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "firmscape/types.hpp"

namespace firmscape {

namespace detail {

// Neumaier compensated summation. Keeps aggregate employee totals well under
// 1e-9 relative error for millions of terms.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

struct SectorAggregate {
  std::int64_t firm_count = 0;
  double employee_total = 0.0;
};

// The mutable simulation state: grid geometry, the live firm population and
// per-cell occupancy histograms. Occupancy is maintained incrementally and
// always equals the exact histogram of firms by (cell, sector).
class WorldState {
 public:
  WorldState() { occupancy_.resize(std::size_t(grid_.cell_count()) * kSectorCount, 0); occupancy_total_.resize(std::size_t(grid_.cell_count()), 0); }

  WorldState(GridGeometry grid, int year) : year_(year), grid_(grid) {
    grid_.validate();
    occupancy_.resize(std::size_t(grid_.cell_count()) * kSectorCount, 0);
    occupancy_total_.resize(std::size_t(grid_.cell_count()), 0);
  }

  int year() const { return year_; }
  void set_year(int year) { year_ = year; }

  const GridGeometry& grid() const { return grid_; }
  const std::vector<Firm>& firms() const { return firms_; }
  std::int64_t firm_count() const { return std::int64_t(firms_.size()); }

  const Firm* find_firm(std::uint64_t id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &firms_[it->second];
  }

  std::uint32_t occupancy(CellId cell, SectorId sector) const {
    return occupancy_[occ_index(cell, sector)];
  }

  std::uint32_t occupancy_total(CellId cell) const {
    return occupancy_total_[std::size_t(grid_.index_of(cell))];
  }

  // Raw histograms laid out cell-major (cell * 21 + sector index).
  const std::vector<std::uint32_t>& occupancy_raw() const { return occupancy_; }
  const std::vector<std::uint32_t>& occupancy_total_raw() const { return occupancy_total_; }

  void add_firm(const Firm& firm) {
    if (!firm.sector.valid())
      throw ValidationError("firm " + std::to_string(firm.id) + ": sector " +
                            std::to_string(firm.sector.value) + " out of range");
    if (!grid_.contains(firm.cell))
      throw ValidationError("firm " + std::to_string(firm.id) + ": cell (" +
                            std::to_string(firm.cell.col) + "," + std::to_string(firm.cell.row) +
                            ") outside grid");
    if (!(firm.size > 0.0))
      throw ValidationError("firm " + std::to_string(firm.id) + ": size must be positive");
    if (index_.contains(firm.id))
      throw ValidationError("duplicate firm_id " + std::to_string(firm.id));
    index_.emplace(firm.id, firms_.size());
    firms_.push_back(firm);
    ++occupancy_[occ_index(firm.cell, firm.sector)];
    ++occupancy_total_[std::size_t(grid_.index_of(firm.cell))];
    next_id_ = std::max(next_id_, firm.id + 1);
  }

  void remove_firm(std::uint64_t id) {
    const std::size_t pos = position_of(id);
    const Firm& firm = firms_[pos];
    --occupancy_[occ_index(firm.cell, firm.sector)];
    --occupancy_total_[std::size_t(grid_.index_of(firm.cell))];
    index_.erase(id);
    if (pos != firms_.size() - 1) {
      firms_[pos] = firms_.back();
      index_[firms_[pos].id] = pos;
    }
    firms_.pop_back();
  }

  void set_firm_size(std::uint64_t id, double new_size) {
    firms_[position_of(id)].size = new_size;
  }

  void apply_move(std::uint64_t id, CellId new_cell) {
    if (!grid_.contains(new_cell))
      throw ValidationError("move target (" + std::to_string(new_cell.col) + "," +
                            std::to_string(new_cell.row) + ") outside grid");
    Firm& firm = firms_[position_of(id)];
    if (firm.cell == new_cell) return;
    --occupancy_[occ_index(firm.cell, firm.sector)];
    --occupancy_total_[std::size_t(grid_.index_of(firm.cell))];
    firm.cell = new_cell;
    ++occupancy_[occ_index(new_cell, firm.sector)];
    ++occupancy_total_[std::size_t(grid_.index_of(new_cell))];
  }

  std::uint64_t allocate_firm_id() { return next_id_++; }

  std::vector<std::uint64_t> sorted_firm_ids() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(firms_.size());
    for (const Firm& f : firms_) ids.push_back(f.id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  std::size_t occ_index(CellId cell, SectorId sector) const {
    return std::size_t(grid_.index_of(cell)) * kSectorCount + std::size_t(sector.index());
  }

  std::size_t position_of(std::uint64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      throw ValidationError("unknown firm_id " + std::to_string(id));
    return it->second;
  }

  int year_ = 0;
  GridGeometry grid_{};
  std::vector<Firm> firms_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<std::uint32_t> occupancy_;        // cell-major, 21 sectors per cell
  std::vector<std::uint32_t> occupancy_total_;  // per cell
  std::uint64_t next_id_ = 1;
};

inline WorldState build_world(const std::vector<Firm>& firms, const GridGeometry& grid, int year) {
  WorldState state(grid, year);
  for (const Firm& firm : firms) state.add_firm(firm);
  return state;
}

inline SectorAggregate sector_aggregate(const WorldState& state, SectorId sector) {
  if (!sector.valid())
    throw ValidationError("sector " + std::to_string(sector.value) + " out of range");
  SectorAggregate agg;
  detail::NeumaierSum employees;
  for (const Firm& firm : state.firms()) {
    if (firm.sector == sector) {
      ++agg.firm_count;
      employees.add(firm.size);
    }
  }
  agg.employee_total = employees.value();
  return agg;
}

}  // namespace firmscape
