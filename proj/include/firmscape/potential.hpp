#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "firmscape/world.hpp"

namespace firmscape {

// Euclidean distance between cell centroids, in cell-edge units scaled by
// cell_size (1.0 by default).
inline double cell_distance(CellId a, CellId b, const GridGeometry& grid) {
  const double dc = double(a.col) - double(b.col);
  const double dr = double(a.row) - double(b.row);
  return grid.cell_size * std::sqrt(dc * dc + dr * dr);
}

// Exact distance-decay sum over an arbitrary per-cell weight grid, including
// the self term at distance zero. Quadratic reference path.
inline double potential_at(CellId target, std::span<const double> weights, double decay,
                           const GridGeometry& grid) {
  if (!(decay > 0.0)) throw ValidationError("decay must be positive");
  double sum = 0.0;
  for (std::int64_t j = 0; j < grid.cell_count(); ++j) {
    const double mass = weights[std::size_t(j)];
    if (mass == 0.0) continue;
    sum += mass * std::exp(-decay * cell_distance(grid.cell_at(j), target, grid));
  }
  return sum;
}

enum class KernelMethod { Exact, Truncated };

struct FieldOptions {
  KernelMethod method = KernelMethod::Truncated;
  // Sources farther than this are ignored by the truncated method. Distance
  // units; may be infinity.
  double radius = 30.0;
  // Cell mass = employee sum instead of firm count.
  bool weight_by_employment = false;
};

namespace detail {

// One row of the truncated kernel disc: contiguous column offsets and their
// precomputed decay weights.
struct DiscRow {
  std::int32_t drow;
  std::int32_t dc_min;
  std::vector<double> weights;
};

inline std::vector<DiscRow> make_disc(double decay, double radius, const GridGeometry& grid) {
  // Clamp to the grid diameter so radius = infinity covers every cell.
  const double max_extent = grid.cell_size * std::hypot(double(grid.ncols - 1), double(grid.nrows - 1));
  const double r = std::min(radius, max_extent);
  const auto max_off = [&](double span) {
    return std::int32_t(std::floor(span / grid.cell_size + 1e-9));
  };
  const std::int32_t kr = std::min(max_off(r), grid.nrows - 1);
  std::vector<DiscRow> disc;
  disc.reserve(std::size_t(2 * kr + 1));
  for (std::int32_t drow = -kr; drow <= kr; ++drow) {
    const double row_dist = grid.cell_size * double(std::abs(drow));
    if (row_dist > r) continue;
    const double remain = std::sqrt(std::max(0.0, r * r - row_dist * row_dist));
    const std::int32_t kc = std::min(max_off(remain), grid.ncols - 1);
    DiscRow row{drow, -kc, {}};
    row.weights.reserve(std::size_t(2 * kc + 1));
    for (std::int32_t dc = -kc; dc <= kc; ++dc) {
      const double d = cell_distance(CellId{0, 0}, CellId{dc, drow}, grid);
      row.weights.push_back(d <= r ? std::exp(-decay * d) : 0.0);
    }
    disc.push_back(std::move(row));
  }
  return disc;
}

}  // namespace detail

// The three potential surfaces for one start-of-year snapshot. Market and
// congestion kernels run over total cell mass and are shared between sectors
// with equal decay rates; agglomeration kernels run over same-sector mass.
class PotentialField {
 public:
  double mp(CellId cell, SectorId sector) const { return value(mp_kernel_[sector.index()], cell); }
  double ap(CellId cell, SectorId sector) const { return value(ap_kernel_[sector.index()], cell); }
  double cp(CellId cell, SectorId sector) const { return value(cp_kernel_[sector.index()], cell); }

  // Per-cell absolute error bound of the truncated method for the kernel
  // feeding this sector's surface: max over cells of ignored mass, times
  // exp(-decay * radius). Zero for the exact method. Bounds describe the
  // snapshot this field was computed from.
  double mp_error_bound(SectorId s) const { return kernels_[mp_kernel_[s.index()]].error_bound; }
  double ap_error_bound(SectorId s) const { return kernels_[ap_kernel_[s.index()]].error_bound; }
  double cp_error_bound(SectorId s) const { return kernels_[cp_kernel_[s.index()]].error_bound; }

  int snapshot_year() const { return year_; }
  const GridGeometry& grid() const { return grid_; }
  const FieldOptions& options() const { return options_; }

  friend PotentialField compute_fields(const WorldState&, const SectorParamsTable&,
                                       const FieldOptions&);
  friend void field_delta_move(PotentialField&, CellId, CellId, SectorId, double);

 private:
  struct Kernel {
    double decay = 0.0;
    int sector_index = -1;  // -1: total mass
    std::vector<double> values;
    double error_bound = 0.0;
  };

  double value(int kernel, CellId cell) const {
    return kernels_[std::size_t(kernel)].values[std::size_t(grid_.index_of(cell))];
  }

  GridGeometry grid_{};
  FieldOptions options_{};
  int year_ = 0;
  std::vector<Kernel> kernels_;
  std::map<double, std::vector<detail::DiscRow>> discs_;  // per decay, truncated method only
  std::array<int, kSectorCount> mp_kernel_{};
  std::array<int, kSectorCount> ap_kernel_{};
  std::array<int, kSectorCount> cp_kernel_{};
};

namespace detail {

// Scatter one point source into a kernel surface via the precomputed disc.
inline void scatter_disc(std::vector<double>& values, const std::vector<DiscRow>& disc,
                         CellId source, double mass, const GridGeometry& grid) {
  for (const DiscRow& row : disc) {
    const std::int32_t r = source.row + row.drow;
    if (r < 0 || r >= grid.nrows) continue;
    const std::int32_t c_lo = std::max(0, source.col + row.dc_min);
    const std::int32_t c_hi =
        std::min(grid.ncols - 1, source.col + row.dc_min + std::int32_t(row.weights.size()) - 1);
    const double* w = row.weights.data() + (c_lo - source.col - row.dc_min);
    double* out = values.data() + std::size_t(r) * grid.ncols + c_lo;
    const std::int32_t n = c_hi - c_lo + 1;
    for (std::int32_t k = 0; k < n; ++k) out[k] += mass * w[k];
  }
}

// Exact double loop over all source cells; the oracle path.
inline void scatter_exact(std::vector<double>& values, std::span<const double> mass,
                          double decay, const GridGeometry& grid) {
  for (std::int64_t j = 0; j < grid.cell_count(); ++j) {
    const double m = mass[std::size_t(j)];
    if (m == 0.0) continue;
    const CellId src = grid.cell_at(j);
    for (std::int64_t i = 0; i < grid.cell_count(); ++i)
      values[std::size_t(i)] += m * std::exp(-decay * cell_distance(src, grid.cell_at(i), grid));
  }
}

// Mass reachable within the truncation radius of each cell; used for the
// per-kernel error bound.
inline void scatter_in_range_mass(std::vector<double>& in_range,
                                  const std::vector<DiscRow>& disc, std::span<const double> mass,
                                  const GridGeometry& grid) {
  for (std::int64_t j = 0; j < grid.cell_count(); ++j) {
    const double m = mass[std::size_t(j)];
    if (m == 0.0) continue;
    const CellId src = grid.cell_at(j);
    for (const DiscRow& row : disc) {
      const std::int32_t r = src.row + row.drow;
      if (r < 0 || r >= grid.nrows) continue;
      const std::int32_t c_lo = std::max(0, src.col + row.dc_min);
      const std::int32_t c_hi =
          std::min(grid.ncols - 1, src.col + row.dc_min + std::int32_t(row.weights.size()) - 1);
      const double* w = row.weights.data() + (c_lo - src.col - row.dc_min);
      double* out = in_range.data() + std::size_t(r) * grid.ncols + c_lo;
      const std::int32_t n = c_hi - c_lo + 1;
      for (std::int32_t k = 0; k < n; ++k)
        if (w[k] > 0.0) out[k] += m;
  }
  }
}

}  // namespace detail

// Compute market, agglomeration and congestion surfaces from the current
// occupancy snapshot.
inline PotentialField compute_fields(const WorldState& state, const SectorParamsTable& params,
                                     const FieldOptions& options = {}) {
  const GridGeometry& grid = state.grid();
  const auto ncells = std::size_t(grid.cell_count());

  PotentialField field;
  field.grid_ = grid;
  field.options_ = options;
  field.year_ = state.year();

  // Mass grids: total and per sector.
  std::vector<double> total_mass(ncells, 0.0);
  std::vector<std::vector<double>> sector_mass(kSectorCount, std::vector<double>(ncells, 0.0));
  if (options.weight_by_employment) {
    for (const Firm& f : state.firms()) {
      const auto idx = std::size_t(grid.index_of(f.cell));
      total_mass[idx] += f.size;
      sector_mass[std::size_t(f.sector.index())][idx] += f.size;
    }
  } else {
    const auto& occ = state.occupancy_raw();
    for (std::size_t cell = 0; cell < ncells; ++cell) {
      double total = 0.0;
      for (int s = 0; s < kSectorCount; ++s) {
        const double m = double(occ[cell * kSectorCount + std::size_t(s)]);
        sector_mass[std::size_t(s)][cell] = m;
        total += m;
      }
      total_mass[cell] = total;
    }
  }

  const bool truncated = options.method == KernelMethod::Truncated;
  const double radius = options.radius;

  const auto disc_for = [&](double decay) -> const std::vector<detail::DiscRow>& {
    auto it = field.discs_.find(decay);
    if (it == field.discs_.end())
      it = field.discs_.emplace(decay, detail::make_disc(decay, radius, grid)).first;
    return it->second;
  };

  // In-range mass depends only on the disc footprint, which is shared across
  // decays for one radius; compute once per mass grid.
  std::vector<double> total_in_range;
  const auto ignored_mass_max = [&](std::span<const double> mass, std::vector<double>& cache,
                                    const std::vector<detail::DiscRow>& disc) {
    if (cache.empty()) {
      cache.assign(ncells, 0.0);
      detail::scatter_in_range_mass(cache, disc, mass, grid);
    }
    double total = 0.0;
    for (double m : mass) total += m;
    double worst = 0.0;
    for (std::size_t i = 0; i < ncells; ++i) worst = std::max(worst, total - cache[i]);
    return worst;
  };

  const auto compute_kernel = [&](double decay, std::span<const double> mass,
                                  std::vector<double>& in_range_cache) {
    PotentialField::Kernel kernel;
    kernel.decay = decay;
    kernel.values.assign(ncells, 0.0);
    if (truncated) {
      const auto& disc = disc_for(decay);
      for (std::size_t j = 0; j < ncells; ++j)
        if (mass[j] != 0.0)
          detail::scatter_disc(kernel.values, disc, grid.cell_at(std::int64_t(j)), mass[j], grid);
      const double max_extent =
          grid.cell_size * std::hypot(double(grid.ncols - 1), double(grid.nrows - 1));
      if (radius < max_extent)
        kernel.error_bound =
            ignored_mass_max(mass, in_range_cache, disc) * std::exp(-decay * radius);
    } else {
      detail::scatter_exact(kernel.values, mass, decay, grid);
    }
    return kernel;
  };

  // Total-mass kernels are deduplicated by decay rate.
  std::map<double, int> total_kernels;
  const auto total_kernel_for = [&](double decay) {
    auto it = total_kernels.find(decay);
    if (it == total_kernels.end()) {
      field.kernels_.push_back(compute_kernel(decay, total_mass, total_in_range));
      it = total_kernels.emplace(decay, int(field.kernels_.size() - 1)).first;
    }
    return it->second;
  };

  for (int s = 0; s < kSectorCount; ++s) {
    const SectorParams& sp = params[std::size_t(s)];
    field.mp_kernel_[std::size_t(s)] = total_kernel_for(sp.decay_mp);
    field.cp_kernel_[std::size_t(s)] = total_kernel_for(sp.decay_cp);
    std::vector<double> in_range_cache;
    auto kernel = compute_kernel(sp.decay_ap, sector_mass[std::size_t(s)], in_range_cache);
    kernel.sector_index = s;
    field.kernels_.push_back(std::move(kernel));
    field.ap_kernel_[std::size_t(s)] = int(field.kernels_.size() - 1);
  }
  return field;
}

enum class FieldSurface { Market, Agglomeration, Congestion };

// Raster dump of one surface for inspection: col,row,value over every cell.
inline void write_field_raster(const PotentialField& field, FieldSurface surface,
                               SectorId sector, std::ostream& out) {
  out << "col,row,value\n";
  const GridGeometry& grid = field.grid();
  char buf[96];
  for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
    const CellId cell = grid.cell_at(i);
    double value = 0.0;
    switch (surface) {
      case FieldSurface::Market: value = field.mp(cell, sector); break;
      case FieldSurface::Agglomeration: value = field.ap(cell, sector); break;
      case FieldSurface::Congestion: value = field.cp(cell, sector); break;
    }
    std::snprintf(buf, sizeof buf, "%d,%d,%.9g\n", cell.col, cell.row, value);
    out << buf;
  }
}

// Incremental field maintenance: move one source of the given mass between
// cells. Applies to the shared total-mass kernels and the sector's own
// agglomeration kernel; error bounds are not updated.
inline void field_delta_move(PotentialField& field, CellId from, CellId to, SectorId sector,
                             double mass = 1.0) {
  if (from == to) return;
  if (!field.grid_.contains(from) || !field.grid_.contains(to))
    throw ValidationError("field_delta_move: cell outside grid");

  const auto apply = [&](PotentialField::Kernel& kernel) {
    if (field.options_.method == KernelMethod::Truncated) {
      const auto& disc = field.discs_.at(kernel.decay);
      detail::scatter_disc(kernel.values, disc, from, -mass, field.grid_);
      detail::scatter_disc(kernel.values, disc, to, mass, field.grid_);
    } else {
      for (std::int64_t i = 0; i < field.grid_.cell_count(); ++i) {
        const CellId cell = field.grid_.cell_at(i);
        kernel.values[std::size_t(i)] +=
            mass * (std::exp(-kernel.decay * cell_distance(to, cell, field.grid_)) -
                    std::exp(-kernel.decay * cell_distance(from, cell, field.grid_)));
      }
    }
  };

  for (auto& kernel : field.kernels_) {
    if (kernel.sector_index == -1 || kernel.sector_index == sector.index()) apply(kernel);
  }
}

}  // namespace firmscape
