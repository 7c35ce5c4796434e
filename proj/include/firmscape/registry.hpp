#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "firmscape/csv.hpp"
#include "firmscape/rng.hpp"
#include "firmscape/types.hpp"

namespace firmscape {

// One row of a firm registry: what the historical microdata records about a
// firm before it is placed on the grid.
struct RegistryRecord {
  std::uint64_t firm_id = 0;
  SectorId sector{};
  std::int64_t size = 1;  // whole employees in registries
  std::int64_t municipality_id = 0;
};

inline constexpr std::string_view kRegistryHeader = "firm_id,sector,size,municipality_id";
inline constexpr std::string_view kMunicipalityHeader = "municipality_id,col,row";

// Parse a registry stream. Every malformed row is reported with its line
// number; duplicate firm ids are rejected.
inline std::vector<RegistryRecord> parse_registry(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("registry: empty input");
  csv::expect_header(line, kRegistryHeader);

  std::vector<RegistryRecord> records;
  std::unordered_set<std::uint64_t> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = csv::trim_cr(line);
    if (view.empty()) continue;
    const auto fields = csv::split(view);
    if (fields.size() != 4)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 4 columns, got " +
                            std::to_string(fields.size()));
    RegistryRecord rec;
    rec.firm_id = std::uint64_t(csv::parse_int(fields[0], line_no, "firm_id"));
    rec.sector = SectorId{int(csv::parse_int(fields[1], line_no, "sector"))};
    rec.size = csv::parse_int(fields[2], line_no, "size");
    rec.municipality_id = csv::parse_int(fields[3], line_no, "municipality_id");
    if (!rec.sector.valid())
      throw ValidationError("line " + std::to_string(line_no) + ": sector " +
                            std::to_string(rec.sector.value) + " out of range 1..21");
    if (rec.size < 1)
      throw ValidationError("line " + std::to_string(line_no) + ": size must be >= 1");
    if (!seen.insert(rec.firm_id).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate firm_id " +
                            std::to_string(rec.firm_id));
    records.push_back(rec);
  }
  return records;
}

// Municipality to grid-cell map. Cell lists are disjoint across
// municipalities and all cells lie inside the grid.
class MunicipalityMap {
 public:
  void add_cell(std::int64_t municipality_id, CellId cell, const GridGeometry& grid) {
    if (!grid.contains(cell))
      throw ValidationError("municipality " + std::to_string(municipality_id) + ": cell (" +
                            std::to_string(cell.col) + "," + std::to_string(cell.row) +
                            ") outside grid");
    const auto key = grid.index_of(cell);
    if (!used_cells_.insert(key).second)
      throw ValidationError("cell (" + std::to_string(cell.col) + "," +
                            std::to_string(cell.row) + ") assigned to more than one municipality");
    cells_[municipality_id].push_back(cell);
  }

  const std::vector<CellId>* cells_for(std::int64_t municipality_id) const {
    const auto it = cells_.find(municipality_id);
    return it == cells_.end() ? nullptr : &it->second;
  }

  std::size_t municipality_count() const { return cells_.size(); }
  const std::map<std::int64_t, std::vector<CellId>>& all() const { return cells_; }

  static MunicipalityMap parse(std::istream& in, const GridGeometry& grid) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("municipality map: empty input");
    csv::expect_header(line, kMunicipalityHeader);
    MunicipalityMap map;
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      const auto view = csv::trim_cr(line);
      if (view.empty()) continue;
      const auto fields = csv::split(view);
      if (fields.size() != 3)
        throw ValidationError("line " + std::to_string(line_no) + ": expected 3 columns, got " +
                              std::to_string(fields.size()));
      const auto id = csv::parse_int(fields[0], line_no, "municipality_id");
      const CellId cell{std::int32_t(csv::parse_int(fields[1], line_no, "col")),
                        std::int32_t(csv::parse_int(fields[2], line_no, "row"))};
      map.add_cell(id, cell, grid);
    }
    return map;
  }

  void write(std::ostream& out) const {
    out << kMunicipalityHeader << '\n';
    for (const auto& [id, cells] : cells_) {
      for (CellId c : cells) out << id << ',' << c.col << ',' << c.row << '\n';
    }
  }

 private:
  std::map<std::int64_t, std::vector<CellId>> cells_;
  std::set<std::int64_t> used_cells_;
};

// Place registry firms on the grid: each firm draws a cell uniformly (with
// replacement) from its municipality's cell list. Draws are keyed by firm id,
// so the result is independent of record order.
inline std::vector<Firm> assign_to_cells(std::span<const RegistryRecord> records,
                                         const MunicipalityMap& map, std::uint64_t seed,
                                         int born_year) {
  std::vector<Firm> firms;
  firms.reserve(records.size());
  for (const RegistryRecord& rec : records) {
    const auto* cells = map.cells_for(rec.municipality_id);
    if (!cells)
      throw ValidationError("firm " + std::to_string(rec.firm_id) + ": unknown municipality_id " +
                            std::to_string(rec.municipality_id));
    auto stream = rng::substream(seed, 0, rec.firm_id, rng::Purpose::Assign);
    Firm firm;
    firm.id = rec.firm_id;
    firm.sector = rec.sector;
    firm.size = double(rec.size);
    firm.cell = (*cells)[std::size_t(stream.bounded(cells->size()))];
    firm.born_year = born_year;
    firms.push_back(firm);
  }
  return firms;
}

}  // namespace firmscape
