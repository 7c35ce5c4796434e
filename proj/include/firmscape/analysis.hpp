#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "firmscape/snapshot.hpp"

namespace firmscape {

// Concentration metrics over one sector's cell-level counts.
struct RankSizeMetrics {
  std::int64_t occupied_cells = 0;
  std::int64_t total_firms = 0;
  double zipf_slope = 0.0;       // log-log least-squares slope over occupied cells
  bool slope_defined = false;    // needs at least two occupied cells
  double top_decile_share = 0.0; // firm share of the top 10% occupied cells
};

inline RankSizeMetrics rank_size_metrics(std::vector<std::int64_t> counts) {
  RankSizeMetrics m;
  std::erase_if(counts, [](std::int64_t c) { return c < 1; });
  std::sort(counts.begin(), counts.end(), std::greater<>());
  m.occupied_cells = std::int64_t(counts.size());
  for (std::int64_t c : counts) m.total_firms += c;
  if (counts.empty()) return m;

  if (counts.size() >= 2) {
    // Least squares of ln(count) on ln(rank).
    const auto n = double(counts.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t r = 0; r < counts.size(); ++r) {
      const double x = std::log(double(r + 1));
      const double y = std::log(double(counts[r]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = sxx - sx * sx / n;
    if (denom > 0.0) {
      m.zipf_slope = (sxy - sx * sy / n) / denom;
      m.slope_defined = true;
    }
  }

  const auto top = std::size_t(std::ceil(0.1 * double(counts.size())));
  std::int64_t top_total = 0;
  for (std::size_t r = 0; r < top; ++r) top_total += counts[r];
  m.top_decile_share = double(top_total) / double(m.total_firms);
  return m;
}

struct SectorAnalysis {
  SectorId sector{};
  RankSizeMetrics metrics{};
};

// Per-sector concentration metrics from a raster snapshot; sector id 0 in the
// result carries the all-sector combination.
inline std::vector<SectorAnalysis> analyze_raster(const std::vector<RasterRow>& rows) {
  std::array<std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t>, kSectorCount> per;
  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> all;
  for (const RasterRow& row : rows) {
    per[std::size_t(row.sector.index())][{row.cell.col, row.cell.row}] += row.count;
    all[{row.cell.col, row.cell.row}] += row.count;
  }

  std::vector<SectorAnalysis> out;
  {
    std::vector<std::int64_t> counts;
    for (const auto& [cell, count] : all) counts.push_back(count);
    out.push_back({SectorId{0}, rank_size_metrics(std::move(counts))});
  }
  for (int s = 0; s < kSectorCount; ++s) {
    std::vector<std::int64_t> counts;
    for (const auto& [cell, count] : per[std::size_t(s)]) counts.push_back(count);
    out.push_back({sector_from_index(s), rank_size_metrics(std::move(counts))});
  }
  return out;
}

// Rank-size table per sector: cell-level counts sorted descending, one row
// per occupied cell. Sector 0 carries the all-sector combination.
inline void write_rank_size_table(std::ostream& out, const std::vector<RasterRow>& rows) {
  out << "sector,rank,count\n";
  std::array<std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t>, kSectorCount + 1>
      per;
  for (const RasterRow& row : rows) {
    per[std::size_t(row.sector.value)][{row.cell.col, row.cell.row}] += row.count;
    per[0][{row.cell.col, row.cell.row}] += row.count;
  }
  for (int s = 0; s <= kSectorCount; ++s) {
    std::vector<std::int64_t> counts;
    for (const auto& [cell, count] : per[std::size_t(s)])
      if (count > 0) counts.push_back(count);
    std::sort(counts.begin(), counts.end(), std::greater<>());
    for (std::size_t r = 0; r < counts.size(); ++r)
      out << s << ',' << (r + 1) << ',' << counts[r] << '\n';
  }
}

// Cell-level difference b - a, nonzero entries only, ordered by
// (row, col, sector).
inline std::vector<RasterRow> raster_diff(const std::vector<RasterRow>& a,
                                          const std::vector<RasterRow>& b) {
  std::map<std::tuple<std::int32_t, std::int32_t, int>, std::int64_t> delta;
  for (const RasterRow& row : a)
    delta[{row.cell.row, row.cell.col, row.sector.value}] -= row.count;
  for (const RasterRow& row : b)
    delta[{row.cell.row, row.cell.col, row.sector.value}] += row.count;
  std::vector<RasterRow> out;
  for (const auto& [key, count] : delta) {
    if (count == 0) continue;
    const auto [row, col, sector] = key;
    out.push_back({CellId{col, row}, SectorId{sector}, count});
  }
  return out;
}

inline void write_analysis(std::ostream& out, const std::vector<SectorAnalysis>& analyses) {
  out << "sector,occupied_cells,total_firms,zipf_slope,top_decile_share\n";
  char buf[160];
  for (const auto& a : analyses) {
    if (a.metrics.slope_defined)
      std::snprintf(buf, sizeof buf, "%d,%lld,%lld,%.6f,%.6f\n", a.sector.value,
                    (long long)a.metrics.occupied_cells, (long long)a.metrics.total_firms,
                    a.metrics.zipf_slope, a.metrics.top_decile_share);
    else
      std::snprintf(buf, sizeof buf, "%d,%lld,%lld,,%.6f\n", a.sector.value,
                    (long long)a.metrics.occupied_cells, (long long)a.metrics.total_firms,
                    a.metrics.top_decile_share);
    out << buf;
  }
}

}  // namespace firmscape
