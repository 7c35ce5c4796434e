#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "firmscape/registry.hpp"
#include "firmscape/rng.hpp"

namespace firmscape {

// Stand-in registry generator for the confidential historical microdata.
struct SyntheticSectorSpec {
  std::int64_t count = 0;
  double mean_size = 5.0;
  // When set, integer sizes are adjusted so the sector employee total matches
  // exactly (must be >= count).
  std::optional<std::int64_t> employee_total{};
};

struct SyntheticSpec {
  std::array<SyntheticSectorSpec, kSectorCount> sectors{};
  double sigma_log = 0.9;      // lognormal shape of the size distribution
  double clustering = 1.0;     // 0 = uniform over municipalities; larger = more skewed
  int municipality_block = 5;  // municipality tile edge, in cells

  void validate() const {
    if (municipality_block < 1)
      throw ValidationError("synthetic: municipality_block must be >= 1");
    if (!(sigma_log >= 0.0)) throw ValidationError("synthetic: sigma_log must be >= 0");
    if (!(clustering >= 0.0)) throw ValidationError("synthetic: clustering must be >= 0");
    for (int s = 0; s < kSectorCount; ++s) {
      const auto& spec = sectors[std::size_t(s)];
      if (spec.count < 0) throw ValidationError("synthetic: negative firm count");
      if (spec.count > 0 && !(spec.mean_size >= 1.0))
        throw ValidationError("synthetic: mean_size must be >= 1");
      if (spec.employee_total && *spec.employee_total < spec.count)
        throw ValidationError("synthetic: employee_total below one employee per firm");
    }
  }
};

struct SyntheticOutput {
  std::vector<RegistryRecord> registry;
  MunicipalityMap map;
};

// Tile the grid into contiguous municipality blocks and draw a registry with
// the requested per-sector counts. Sizes are lognormal around each sector's
// mean; municipalities are picked with rank-skewed weights so clustering can
// be dialled from uniform (0) upward.
inline SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const GridGeometry& grid,
                                          std::uint64_t seed) {
  spec.validate();
  grid.validate();

  SyntheticOutput out;

  const int block = spec.municipality_block;
  const int tiles_x = (grid.ncols + block - 1) / block;
  const int tiles_y = (grid.nrows + block - 1) / block;
  std::int64_t next_municipality = 1;
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      const std::int64_t id = next_municipality++;
      for (int r = ty * block; r < std::min((ty + 1) * block, int(grid.nrows)); ++r)
        for (int c = tx * block; c < std::min((tx + 1) * block, int(grid.ncols)); ++c)
          out.map.add_cell(id, CellId{c, r}, grid);
    }
  }

  // Rank-skewed municipality weights: w_m = m^-clustering.
  const auto n_mun = std::int64_t(out.map.municipality_count());
  std::vector<double> cumulative(static_cast<std::size_t>(n_mun), 0.0);
  double total = 0.0;
  for (std::int64_t m = 0; m < n_mun; ++m) {
    total += std::pow(double(m + 1), -spec.clustering);
    cumulative[std::size_t(m)] = total;
  }

  const auto pick_municipality = [&](double u) {
    const double target = u * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return std::int64_t(it - cumulative.begin()) + 1;
  };

  std::uint64_t next_id = 1;
  for (int s = 0; s < kSectorCount; ++s) {
    const auto& sector_spec = spec.sectors[std::size_t(s)];
    if (sector_spec.count == 0) continue;
    // Location parameter so the lognormal mean equals mean_size.
    const double mu = std::log(sector_spec.mean_size) - 0.5 * spec.sigma_log * spec.sigma_log;
    const std::size_t first = out.registry.size();
    for (std::int64_t i = 0; i < sector_spec.count; ++i) {
      RegistryRecord rec;
      rec.firm_id = next_id++;
      rec.sector = sector_from_index(s);
      auto stream = rng::substream(seed, 0, rec.firm_id, rng::Purpose::Synthetic);
      rec.size = std::max<std::int64_t>(1, std::llround(stream.lognormal(mu, spec.sigma_log)));
      rec.municipality_id = pick_municipality(stream.uniform01());
      out.registry.push_back(rec);
    }
    if (sector_spec.employee_total) {
      // Spread the rounding gap one employee at a time, round-robin, never
      // dropping a firm below one employee.
      std::int64_t diff = *sector_spec.employee_total;
      for (std::size_t i = first; i < out.registry.size(); ++i) diff -= out.registry[i].size;
      std::size_t cursor = first;
      while (diff != 0) {
        RegistryRecord& rec = out.registry[cursor];
        if (diff > 0) {
          ++rec.size;
          --diff;
        } else if (rec.size > 1) {
          --rec.size;
          ++diff;
        }
        cursor = cursor + 1 < out.registry.size() ? cursor + 1 : first;
      }
    }
  }
  return out;
}

}  // namespace firmscape
