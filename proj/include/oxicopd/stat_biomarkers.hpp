#pragma once

#include <optional>
#include <span>

namespace oxicopd {

struct StatParams {
  double percentile = 1.0;               // P_x
  double below_median = 2.0;             // M_x, in % SpO2 below the median
  std::optional<double> zc_level;        // ZC_x level; median of the signal when empty
  double delta_index_s = 12.0;           // segment length for the delta index
};

struct StatBiomarkers {
  double av = 0, med = 0, min = 0, sd = 0, rg = 0;
  double px = 0;
  double mx = 0;
  double zc = 0;
  double delta_index = 0;
  bool delta_index_short = false; // fewer than two full segments
};

/// Level crossings with a strict sign change between neighbours.
std::size_t zero_crossings(std::span<const double> signal, double level);

/// Mean absolute difference between consecutive non-overlapping segment means.
/// Returns nullopt when fewer than two full segments fit.
std::optional<double> delta_index(std::span<const double> signal, double fs, double segment_s);

StatBiomarkers stat_biomarkers(std::span<const double> signal, double fs, const StatParams& params = {});

} // namespace oxicopd
