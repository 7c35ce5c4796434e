#pragma once

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "firmscape/csv.hpp"
#include "firmscape/world.hpp"

namespace firmscape {

inline constexpr std::string_view kSnapshotFirmsHeader = "firm_id,sector,size,col,row,year";
inline constexpr std::string_view kSnapshotRasterHeader = "col,row,sector,count";

namespace detail {

// Shortest decimal form that round-trips a double exactly.
inline std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == value) {
    for (int prec = 9; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, value);
      std::sscanf(shorter, "%lf", &back);
      if (back == value) return shorter;
    }
  }
  return buf;
}

}  // namespace detail

// Firm-level snapshot, one row per firm, sorted by firm id.
inline void write_snapshot_firms(const WorldState& state, std::ostream& out) {
  out << kSnapshotFirmsHeader << '\n';
  std::vector<const Firm*> sorted;
  sorted.reserve(state.firms().size());
  for (const Firm& f : state.firms()) sorted.push_back(&f);
  std::sort(sorted.begin(), sorted.end(),
            [](const Firm* a, const Firm* b) { return a->id < b->id; });
  for (const Firm* f : sorted) {
    out << f->id << ',' << f->sector.value << ',' << detail::format_real(f->size) << ','
        << f->cell.col << ',' << f->cell.row << ',' << state.year() << '\n';
  }
}

// Per-cell occupancy raster, the quantity the concentration maps show.
// Zero-count rows are omitted; rows are ordered by (row, col, sector).
inline void write_snapshot_raster(const WorldState& state, std::ostream& out) {
  out << kSnapshotRasterHeader << '\n';
  const GridGeometry& grid = state.grid();
  for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
    const CellId cell = grid.cell_at(i);
    for (int s = 0; s < kSectorCount; ++s) {
      const std::uint32_t count = state.occupancy(cell, sector_from_index(s));
      if (count > 0)
        out << cell.col << ',' << cell.row << ',' << (s + 1) << ',' << count << '\n';
    }
  }
}

// Write both snapshot files for one state: <prefix>_firms.csv and
// <prefix>_raster.csv.
inline void write_snapshot(const WorldState& state, const std::string& path_prefix) {
  const std::string firms_path = path_prefix + "_firms.csv";
  std::ofstream firms(firms_path);
  if (!firms) throw IoError("cannot open " + firms_path + " for writing");
  write_snapshot_firms(state, firms);
  if (!firms.good()) throw IoError("write failed for " + firms_path);

  const std::string raster_path = path_prefix + "_raster.csv";
  std::ofstream raster(raster_path);
  if (!raster) throw IoError("cannot open " + raster_path + " for writing");
  write_snapshot_raster(state, raster);
  if (!raster.good()) throw IoError("write failed for " + raster_path);
}

struct SnapshotFirms {
  std::vector<Firm> firms;
  int year = 0;
};

// Read a firm-level snapshot back. Lineage is not serialized; born_year is
// set to the snapshot year.
inline SnapshotFirms read_snapshot_firms(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("snapshot: empty input");
  csv::expect_header(line, kSnapshotFirmsHeader);
  SnapshotFirms result;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = csv::trim_cr(line);
    if (view.empty()) continue;
    const auto fields = csv::split(view);
    if (fields.size() != 6)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 6 columns, got " +
                            std::to_string(fields.size()));
    Firm f;
    f.id = std::uint64_t(csv::parse_int(fields[0], line_no, "firm_id"));
    f.sector = SectorId{int(csv::parse_int(fields[1], line_no, "sector"))};
    f.size = csv::parse_real(fields[2], line_no, "size");
    f.cell = CellId{std::int32_t(csv::parse_int(fields[3], line_no, "col")),
                    std::int32_t(csv::parse_int(fields[4], line_no, "row"))};
    result.year = int(csv::parse_int(fields[5], line_no, "year"));
    f.born_year = result.year;
    if (!f.sector.valid())
      throw ValidationError("line " + std::to_string(line_no) + ": sector out of range");
    result.firms.push_back(f);
  }
  return result;
}

struct RasterRow {
  CellId cell{};
  SectorId sector{};
  std::int64_t count = 0;
};

inline std::vector<RasterRow> read_snapshot_raster(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("raster: empty input");
  csv::expect_header(line, kSnapshotRasterHeader);
  std::vector<RasterRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = csv::trim_cr(line);
    if (view.empty()) continue;
    const auto fields = csv::split(view);
    if (fields.size() != 4)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 4 columns, got " +
                            std::to_string(fields.size()));
    RasterRow row;
    row.cell = CellId{std::int32_t(csv::parse_int(fields[0], line_no, "col")),
                      std::int32_t(csv::parse_int(fields[1], line_no, "row"))};
    row.sector = SectorId{int(csv::parse_int(fields[2], line_no, "sector"))};
    row.count = csv::parse_int(fields[3], line_no, "count");
    if (!row.sector.valid())
      throw ValidationError("line " + std::to_string(line_no) + ": sector out of range");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace firmscape
