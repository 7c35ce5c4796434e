#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "firmscape/calibration.hpp"
#include "firmscape/types.hpp"

namespace firmscape::presets {

// Calibrated demographic rates for the 21-sector Dutch economy, 1950-2004:
// mean annual growth, base closure probability, critical spin-off size and
// the spin-off logistic shape, indexed by sector id 1..21.
struct DemographicRow {
  double epsilon;
  double theta;
  double s_crit;
  double spin_alpha;
  double spin_beta;
};

inline constexpr std::array<DemographicRow, kSectorCount> kDemographicRates{{
    {-0.00646, 0.00010, 24.0, 3.1, 0.1},    // 1  pottery / glass
    {0.00334, 0.00120, 8.0, 4.0, 0.1},      // 2  publishing / printing
    {0.01129, 0.00900, 7.0, 2.7, 0.1},      // 3  construction
    {0.00607, 0.01500, 16.0, 4.0, 0.1},     // 4  chemical industry
    {0.02770, 0.00100, 7.0, 2.8, 0.1},      // 5  wood industry
    {-0.01779, 0.00700, 6.0, 5.3, 0.1},     // 6  clothing production
    {-0.00662, 0.01500, 5.0, 5.5, 0.1},     // 7  leather / rubber
    {-0.01489, 0.02000, 56.0, 6.0, 0.1},    // 8  mining / oil / gas
    {0.00395, 0.00852, 11.0, 2.0, 0.1},     // 9  manufacturing
    {-0.00137, 0.00700, 52.0, 4.0, 0.1},    // 10 paper industry
    {-0.01620, 0.01000, 66.0, 6.5, 0.1},    // 11 textiles industry
    {-0.00302, 0.00400, 39.0, 6.0, 0.1},    // 12 utilities
    {-0.00862, 0.01000, 10.0, 5.0, 0.1},    // 13 food industry
    {0.02335, 0.00100, 2.0, 6.0, 0.1},      // 14 retail
    {0.03137, 0.00100, 5.0, 2.0, 0.1},      // 15 wholesale
    {0.04838, 0.00010, 3303.0, 1.0, 0.1},   // 16 air transport
    {0.01869, 0.01294, 5.0, 3.5, 0.1},      // 17 inland transport
    {-0.01269, 0.02000, 7.0, 5.5, 0.1},     // 18 water transport
    {0.07463, 0.00100, 10.0, 0.1, 0.1},     // 19 transport services
    {0.02895, 0.00100, 19.0, 1.0, 0.1},     // 20 communications
    {0.05542, 0.01147, 3.0, 1.0, 0.1},      // 21 catering
}};

// Distance-decay rates per sector for the potential surfaces. Five sectors
// carry their own spatial reach; the rest share the default.
inline constexpr double decay_for_sector(int sector_value) {
  switch (sector_value) {
    case 9: return 0.1;
    case 15: return 0.2;
    case 14: return 0.3;
    case 3: return 0.4;
    case 6: return 0.5;
    default: return 0.6;
  }
}

// Utility weights on the three surfaces, identical across sectors.
inline constexpr double kWeightMp = 1.0;
inline constexpr double kWeightAp = 0.5;
inline constexpr double kWeightCp = -1.0;

// Relocation mode probabilities.
inline constexpr double kLambdaStay = 0.9;
inline constexpr double kLambdaOccupied = 0.09;
inline constexpr double kLambdaUnoccupied = 0.01;

// National per-sector firm and employee totals for 1950 and 2004, the
// calibration targets.
struct SectorTotalsRow {
  std::int64_t firms_1950;
  std::int64_t employees_1950;
  std::int64_t firms_2004;
  std::int64_t employees_2004;
};

inline constexpr std::array<SectorTotalsRow, kSectorCount> kSectorTotals{{
    {2074, 50692, 2137, 33006},       // 1
    {9206, 72521, 8274, 85594},       // 2
    {41790, 294211, 76996, 473520},   // 3
    {3501, 56992, 1118, 75676},       // 4
    {9000, 64564, 10386, 161132},     // 5
    {29137, 165154, 1627, 6471},      // 6
    {11978, 58951, 1673, 37893},      // 7
    {936, 52703, 314, 10337},         // 8
    {39726, 426990, 48082, 518150},   // 9
    {455, 23579, 462, 21831},         // 10
    {1965, 130211, 1460, 16272},      // 11
    {861, 33895, 459, 28376},         // 12
    {24116, 235842, 4918, 130678},    // 13
    {130285, 313460, 120458, 708681}, // 14
    {38236, 180119, 71408, 485200},   // 15
    {2, 6606, 358, 23863},            // 16
    {20930, 102569, 14681, 206096},   // 17
    {10476, 69722, 3871, 21956},      // 18
    {2984, 29052, 16324, 146130},     // 19
    {2345, 44970, 5893, 115279},      // 20
    {26441, 77686, 45353, 310182},    // 21
}};

inline constexpr std::int64_t kTotalFirms1950 = 406444;
inline constexpr int kStartYear = 1950;
inline constexpr int kEndYear = 2004;
inline constexpr int kHorizonYears = kEndYear - kStartYear;

// Assemble the full per-sector parameter table for the calibrated scenario.
// Noise scales, the relocation distance penalty and the spin-off size
// distribution have no published values; the defaults here are the project's.
inline SectorParamsTable scenario_sector_params() {
  SectorParamsTable table;
  for (int s = 0; s < kSectorCount; ++s) {
    const DemographicRow& row = kDemographicRates[std::size_t(s)];
    SectorParams p;
    p.epsilon = row.epsilon;
    p.theta = row.theta;
    p.s_crit = row.s_crit;
    p.spin_alpha = row.spin_alpha;
    p.spin_beta = row.spin_beta;
    p.delta = -0.01;
    p.sigma_phi = 0.02;
    p.sigma_rho = 0.0;
    p.spin_mu = 0.0;
    p.spin_sigma = 1.0;
    const double decay = decay_for_sector(s + 1);
    p.decay_mp = decay;
    p.decay_ap = decay;
    p.decay_cp = decay;
    p.w_mp = kWeightMp;
    p.w_ap = kWeightAp;
    p.w_cp = kWeightCp;
    table[std::size_t(s)] = p;
  }
  return table;
}

inline RelocationParams scenario_relocation_params() {
  return RelocationParams{kLambdaStay, kLambdaOccupied, kLambdaUnoccupied};
}

inline std::vector<CalibrationTarget> sector_targets() {
  std::vector<CalibrationTarget> targets;
  targets.reserve(kSectorCount);
  for (int s = 0; s < kSectorCount; ++s) {
    const SectorTotalsRow& row = kSectorTotals[std::size_t(s)];
    CalibrationTarget t;
    t.sector = sector_from_index(s);
    t.firms_t0 = row.firms_1950;
    t.employees_t0 = row.employees_1950;
    t.firms_T = row.firms_2004;
    t.employees_T = row.employees_2004;
    t.horizon_years = kHorizonYears;
    targets.push_back(t);
  }
  return targets;
}

}  // namespace firmscape::presets
