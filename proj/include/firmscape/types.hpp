#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace firmscape {

inline constexpr int kSectorCount = 21;

// Invalid configuration or input data. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or stream failure. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Industrial sector, 1-based id in 1..=21.
struct SectorId {
  int value = 1;

  constexpr int index() const { return value - 1; }
  constexpr bool valid() const { return value >= 1 && value <= kSectorCount; }
  friend constexpr bool operator==(SectorId, SectorId) = default;
};

constexpr SectorId sector_from_index(int index) { return SectorId{index + 1}; }

struct CellId {
  std::int32_t col = 0;
  std::int32_t row = 0;

  friend constexpr bool operator==(CellId, CellId) = default;
};

struct GridGeometry {
  std::int32_t ncols = 1;
  std::int32_t nrows = 1;
  double cell_size = 1.0;  // model distance units per cell edge

  constexpr std::int64_t cell_count() const { return std::int64_t(ncols) * nrows; }
  constexpr bool contains(CellId c) const {
    return c.col >= 0 && c.col < ncols && c.row >= 0 && c.row < nrows;
  }
  constexpr std::int64_t index_of(CellId c) const {
    return std::int64_t(c.row) * ncols + c.col;
  }
  constexpr CellId cell_at(std::int64_t index) const {
    return CellId{std::int32_t(index % ncols), std::int32_t(index / ncols)};
  }

  void validate() const {
    if (ncols < 1 || nrows < 1)
      throw ValidationError("grid dimensions must be at least 1x1");
    if (!(cell_size > 0.0))
      throw ValidationError("grid cell_size must be positive");
  }
};

// A firm agent. Sizes are real-valued employee counts; reports round to whole
// employees at output time only.
struct Firm {
  std::uint64_t id = 0;
  SectorId sector{};
  double size = 1.0;
  CellId cell{};
  int born_year = 0;
  std::optional<std::uint64_t> parent_id{};  // spin-off lineage
};

// All per-sector constants: demographic rates, spin-off model, distance-decay
// rates and utility weights.
struct SectorParams {
  double epsilon = 0.0;     // mean annual relative growth
  double theta = 0.0;       // base closure probability
  double spin_alpha = 1.0;  // spin-off logistic slope factor
  double spin_beta = 0.1;   // spin-off logistic offset
  double s_crit = 1.0;      // size scale at which spin-offs become frequent
  double delta = -0.01;     // relocation distance penalty per cell edge, <= 0
  double sigma_phi = 0.02;  // growth noise std dev
  double sigma_rho = 0.0;   // closure noise std dev
  double spin_mu = 0.0;     // spin-off size lognormal location
  double spin_sigma = 1.0;  // spin-off size lognormal shape
  double decay_mp = 0.6;    // market potential distance decay
  double decay_ap = 0.6;    // agglomeration potential distance decay
  double decay_cp = 0.6;    // congestion potential distance decay
  double w_mp = 1.0;        // utility weight on market potential
  double w_ap = 0.5;        // utility weight on agglomeration potential
  double w_cp = -1.0;       // utility weight on congestion potential

  // Logistic orientation: +1 makes spin-off probability fall with size,
  // -1 makes it rise.
  int spin_orientation = 1;

  // When set, a constant spin-off probability replaces the size logistic.
  // Calibration fits this proxy.
  std::optional<double> spin_rate{};

  void validate(SectorId sector) const {
    const std::string tag = "sector " + std::to_string(sector.value) + ": ";
    if (!(theta >= 0.0 && theta <= 1.0))
      throw ValidationError(tag + "theta must lie in [0,1]");
    if (!(s_crit > 0.0)) throw ValidationError(tag + "s_crit must be positive");
    if (!(decay_mp > 0.0 && decay_ap > 0.0 && decay_cp > 0.0))
      throw ValidationError(tag + "decay rates must be positive");
    if (!(sigma_phi >= 0.0 && sigma_rho >= 0.0))
      throw ValidationError(tag + "noise scales must be non-negative");
    if (delta > 0.0) throw ValidationError(tag + "delta must be <= 0");
    if (spin_orientation != 1 && spin_orientation != -1)
      throw ValidationError(tag + "spin_orientation must be +1 or -1");
    if (spin_rate && !(*spin_rate >= 0.0 && *spin_rate <= 1.0))
      throw ValidationError(tag + "spin_rate must lie in [0,1]");
  }
};

using SectorParamsTable = std::array<SectorParams, kSectorCount>;

// Annual relocation mode probabilities: stay, move toward same-sector
// presence, move where the sector is absent.
struct RelocationParams {
  double lambda_stay = 0.9;
  double lambda_occupied = 0.09;
  double lambda_unoccupied = 0.01;

  void validate() const {
    for (double v : {lambda_stay, lambda_occupied, lambda_unoccupied})
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("relocation probabilities must lie in [0,1]");
    const double sum = lambda_stay + lambda_occupied + lambda_unoccupied;
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("relocation probabilities must sum to 1");
  }
};

}  // namespace firmscape
